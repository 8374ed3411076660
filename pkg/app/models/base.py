"""
Base model classes
"""

from typing import Any, Dict

import numpy as np
from pydantic import BaseModel, ConfigDict


def to_plain(value: Any) -> Any:
    """Convert numpy and complex payloads to JSON-friendly values"""
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return [[float(z.real), float(z.imag)] for z in value.ravel()] if value.ndim == 1 else \
                [to_plain(row) for row in value]
        return value.tolist()
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, BaseModel):
        return value.model_dump(mode="python")
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    return value


class ArrayModel(BaseModel):
    """Immutable value object that may carry numpy arrays"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def model_post_init(self, __context: Any) -> None:
        for name in self.model_fields:
            value = getattr(self, name)
            if isinstance(value, np.ndarray) and value.flags.writeable:
                frozen = np.array(value, copy=True)
                frozen.setflags(write=False)
                self.__dict__[name] = frozen

    def to_dict(self) -> Dict[str, Any]:
        """Convert model to dictionary"""
        return {name: to_plain(getattr(self, name)) for name in self.model_fields}

    def __repr__(self):
        shown = []
        for name in self.model_fields:
            value = getattr(self, name)
            if isinstance(value, np.ndarray):
                shown.append(f"{name}=<array {value.shape}>")
            elif isinstance(value, (int, float, bool, str)):
                shown.append(f"{name}={value!r}")
        return f"<{self.__class__.__name__}({', '.join(shown)})>"
