import logging
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from composer_id.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from composer_id.nn.model import Model
from composer_id.nn.optim import AdamState
from composer_id.repo._binary import ByteReader, f32, text, u32

logger = logging.getLogger("composer_id.checkpoint")

OPT_PREFIX = "opt/"
# the step is kept as two 16-bit halves, each exact in float32
STEP_HALF = 1 << 16


def _entries(model: Model, state: Optional[AdamState]) -> Dict[str, np.ndarray]:
    entries = model.state_dict()
    if state is not None:
        if not 0 <= state.step < STEP_HALF * STEP_HALF:
            raise ValueError(f"optimizer step {state.step} does not fit a checkpoint")
        entries[f"{OPT_PREFIX}step"] = np.array(divmod(state.step, STEP_HALF), dtype=np.float32)
        for name in model.parameters():
            if name in state.m:
                entries[f"{OPT_PREFIX}m/{name}"] = state.m[name]
                entries[f"{OPT_PREFIX}v/{name}"] = state.v[name]
    return entries


def encode_checkpoint(model: Model, state: Optional[AdamState] = None) -> bytes:
    """Serialize model tensors (and optional Adam state under ``opt/``) to CCKP bytes."""
    entries = _entries(model, state)
    parts = [CHECKPOINT_MAGIC, u32(CHECKPOINT_VERSION, len(entries))]
    for name, value in entries.items():
        value = np.asarray(value)
        parts.append(text(name) + u32(value.ndim, *value.shape) + f32(value))
    return b"".join(parts)


def save_checkpoint(path: Path, model: Model, state: Optional[AdamState] = None) -> None:
    """
    Write a CCKP checkpoint.

    Parameters
    ----------
    path : Path
        Target file.
    model : Model
        Model whose parameters and batch-norm statistics are stored.
    state : AdamState, optional
        Optimizer moments and step, stored under the ``opt/`` prefix.
    """
    Path(path).write_bytes(encode_checkpoint(model, state))
    logger.debug("Saved checkpoint %s", path)


def read_checkpoint_entries(path: Path) -> Dict[str, np.ndarray]:
    """Raw ``name -> array`` entries of a CCKP file, in file order."""
    reader = ByteReader(Path(path).read_bytes(), str(path))
    if reader.take(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a checkpoint (bad magic)")
    version, count = reader.u32(2)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    entries: Dict[str, np.ndarray] = {}
    for _ in range(count):
        name = reader.text()
        (ndim,) = reader.u32()
        shape = reader.u32(ndim) if ndim else ()
        entries[name] = reader.f32(shape)
    if not reader.at_end():
        raise ValueError(f"{path}: trailing bytes after {count} entries")
    return entries


def load_checkpoint(path: Path, model: Model, state: Optional[AdamState] = None) -> None:
    """
    Load a CCKP checkpoint into ``model`` (and ``state`` when given).

    Every tensor shape is validated against the model built from the
    current configuration.

    Raises
    ------
    ValueError
        On unknown tensors, missing tensors or shape mismatches.
    """
    entries = read_checkpoint_entries(path)
    model_entries = {k: v for k, v in entries.items() if not k.startswith(OPT_PREFIX)}
    expected = set(model.parameters()) | set(model.buffers())
    unknown = sorted(set(model_entries) - expected)
    if unknown:
        raise ValueError(f"{path}: checkpoint has tensors the model does not: {', '.join(unknown)}")
    model.load_state_dict(model_entries)

    if state is None:
        return
    if f"{OPT_PREFIX}step" not in entries:
        raise ValueError(f"{path}: checkpoint carries no optimizer state")
    step = entries[f"{OPT_PREFIX}step"]
    if step.shape != (2,):
        raise ValueError(f"{path}: optimizer step has shape {step.shape}, expected (2,)")
    high, low = step.astype(np.int64)
    state.step = int(high) * STEP_HALF + int(low)
    state.m.clear()
    state.v.clear()
    for name, tensor in model.parameters().items():
        m_key, v_key = f"{OPT_PREFIX}m/{name}", f"{OPT_PREFIX}v/{name}"
        if m_key not in entries:
            continue
        for key in (m_key, v_key):
            if entries[key].shape != tensor.shape:
                raise ValueError(f"shape mismatch for {key!r}: expected {tensor.shape}, got {entries[key].shape}")
        state.m[name] = entries[m_key].astype(tensor.data.dtype)
        state.v[name] = entries[v_key].astype(tensor.data.dtype)
