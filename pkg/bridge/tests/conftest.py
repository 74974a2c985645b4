import sys
from pathlib import Path

# Make the shared fixture helpers importable as plain modules.
sys.path.insert(0, str(Path(__file__).resolve().parent))

# The consumer suite must stand alone: without the bridge installed this
# directory simply collects nothing.
collect_ignore_glob: list[str] = []
try:
    import promdec_bridge  # noqa: F401
except ImportError:
    collect_ignore_glob = ["test_*.py"]
