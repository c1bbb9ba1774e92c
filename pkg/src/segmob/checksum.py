# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import hashlib
import json
from pathlib import Path
from typing import Any

# **************************************************************************************

# Files are hashed in chunks so arbitrarily large trajectory files stay out of memory:
CHUNK_SIZE = 1 << 20

# **************************************************************************************


def compute_file_digest(path: Path) -> str:
    """
    Compute the SHA-256 digest of a file's bytes.

    Args:
        path: The file to hash.

    Returns:
        The hexadecimal digest, prefixed with the algorithm, e.g., "sha256:ab12...".
    """
    digest = hashlib.sha256()

    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(CHUNK_SIZE), b""):
            digest.update(chunk)

    return f"sha256:{digest.hexdigest()}"


# **************************************************************************************


def compute_payload_digest(payload: Any) -> str:
    """
    Compute the SHA-256 digest of a JSON-serialisable payload in canonical form
    (sorted keys, no insignificant whitespace).
    """
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)

    return f"sha256:{hashlib.sha256(canonical.encode('utf-8')).hexdigest()}"


# **************************************************************************************


def get_user_shard(user_id: str, shards: int) -> int:
    """
    Assign a user to one of a fixed number of shards by a stable hash of their id.

    Python's built-in hash() is salted per process, so a cryptographic digest is
    used to keep the assignment identical across runs and worker processes.
    """
    value = int.from_bytes(hashlib.sha1(user_id.encode("utf-8")).digest()[:8], "big")

    return value % shards


# **************************************************************************************
