import sys
from pathlib import Path

# Make the shared oracle helpers importable as plain modules.
sys.path.insert(0, str(Path(__file__).resolve().parent))
