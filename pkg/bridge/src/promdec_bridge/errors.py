class BridgeError(Exception):
    """Any contract violation on the bridge side: bad audio, bad manifest,
    checkpoint/token mismatch, reference/vocab mismatch."""
