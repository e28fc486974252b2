"""Bound selectors: which upper/lower bound family and its tightening exponents."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import InvalidParameterError, PreconditionError

inf = math.inf


class BoundTag(str, Enum):
    UPPER_THM1 = "thm1"
    UPPER_THM2 = "thm2"
    UPPER_COR1 = "cor1"
    UPPER_COR2 = "cor2"
    LOWER_THM3 = "thm3"
    LOWER_THM4 = "thm4"
    LOWER_COR3 = "cor3"
    LOWER_COR4 = "cor4"
    LOWER_THM5 = "thm5"


_UPPER = {BoundTag.UPPER_THM1, BoundTag.UPPER_THM2, BoundTag.UPPER_COR1, BoundTag.UPPER_COR2}
_NEEDS_A = {BoundTag.UPPER_THM1, BoundTag.UPPER_THM2, BoundTag.LOWER_THM3, BoundTag.LOWER_THM4}
_NEEDS_B = {BoundTag.LOWER_THM3, BoundTag.LOWER_THM4, BoundTag.LOWER_COR3, BoundTag.LOWER_COR4, BoundTag.LOWER_THM5}
# the a -> infinity members carry no numeric sentinel
_A_FIXED = {BoundTag.UPPER_COR1: 1.0, BoundTag.LOWER_COR3: 1.0,
            BoundTag.UPPER_COR2: inf, BoundTag.LOWER_COR4: inf, BoundTag.LOWER_THM5: inf}


@dataclass(frozen=True)
class BoundKind:
    """A bound family plus its parameters.

    ``a`` is present for the ``thm1..thm4`` tags and ``b`` for every lower
    tag. Both must be finite and positive; the ``a -> inf`` limit is selected
    through the ``cor2``/``cor4``/``thm5`` tags.
    """

    tag: BoundTag
    a: Optional[float] = None
    b: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "tag", BoundTag(self.tag))
        for name, needed in (("a", self.tag in _NEEDS_A), ("b", self.tag in _NEEDS_B)):
            value = getattr(self, name)
            if needed:
                if value is None:
                    raise InvalidParameterError(name, f"{self.tag.value} requires {name}")
                value = float(value)
                if not (math.isfinite(value) and value > 0):
                    raise InvalidParameterError(name, f"must be finite and > 0, got {value!r}")
                object.__setattr__(self, name, value)
            elif value is not None:
                raise InvalidParameterError(name, f"{self.tag.value} takes no {name}")

    # convenience constructors
    @classmethod
    def thm1(cls, a):
        return cls(BoundTag.UPPER_THM1, a=a)

    @classmethod
    def thm2(cls, a):
        return cls(BoundTag.UPPER_THM2, a=a)

    @classmethod
    def cor1(cls):
        return cls(BoundTag.UPPER_COR1)

    @classmethod
    def cor2(cls):
        return cls(BoundTag.UPPER_COR2)

    @classmethod
    def thm3(cls, a, b):
        return cls(BoundTag.LOWER_THM3, a=a, b=b)

    @classmethod
    def thm4(cls, a, b):
        return cls(BoundTag.LOWER_THM4, a=a, b=b)

    @classmethod
    def cor3(cls, b):
        return cls(BoundTag.LOWER_COR3, b=b)

    @classmethod
    def cor4(cls, b):
        return cls(BoundTag.LOWER_COR4, b=b)

    @classmethod
    def thm5(cls, b):
        return cls(BoundTag.LOWER_THM5, b=b)

    @property
    def is_upper(self):
        return self.tag in _UPPER

    @property
    def is_lower(self):
        return not self.is_upper

    @property
    def exponent_a(self):
        """Effective ``a``: 1 for cor1/cor3, ``inf`` for cor2/cor4/thm5."""
        return _A_FIXED.get(self.tag, self.a)

    def anchor(self, model):
        """Shift anchor ``x0`` (or the mean for thm5); ``None`` for cor2.

        Raises :class:`PreconditionError` when the model's support does not
        admit this kind.
        """
        support = model.support
        if support.upper != inf:
            raise PreconditionError("right_unbounded", f"{model.name} has a finite upper endpoint")
        tag = self.tag
        if tag is BoundTag.UPPER_COR2:
            return None
        if tag in (BoundTag.UPPER_THM1, BoundTag.LOWER_THM3):
            if support.lower != 0.0:
                raise PreconditionError("support_lower_zero", f"{tag.value} needs support lower endpoint 0")
            return 0.0
        if tag is BoundTag.LOWER_THM5:
            if support.lower != -inf:
                raise PreconditionError("real_line_support", "thm5 needs support (-inf, inf)")
            mean = model.mean
            if mean is None:
                mean = model.resolved_mean
            if mean is None or not math.isfinite(mean):
                raise PreconditionError("known_mean", "thm5 needs a finite mean")
            return mean
        if not math.isfinite(support.lower):
            raise PreconditionError("finite_lower", f"{tag.value} needs a finite support lower endpoint")
        return support.lower

    @property
    def label(self):
        parts = []
        if self.a is not None:
            parts.append(f"a={self.a:g}")
        if self.b is not None:
            parts.append(f"b={self.b:g}")
        return self.tag.value + (f"({','.join(parts)})" if parts else "")

    def __str__(self):
        return self.label

    @classmethod
    def parse(cls, text):
        """Parse ``cor2``, ``thm5(b=1)``, ``thm4:a=2,b=0.5`` and similar."""
        m = re.fullmatch(r"\s*([a-z]+\d)\s*(?:[:(]\s*(.*?)\s*\)?)?\s*", text.lower())
        if not m:
            raise InvalidParameterError("kind", f"cannot parse {text!r}")
        try:
            tag = BoundTag(m.group(1))
        except ValueError:
            raise InvalidParameterError("kind", f"unknown bound kind {m.group(1)!r}") from None
        kwargs = {}
        if m.group(2):
            for item in m.group(2).split(","):
                key, _, value = item.partition("=")
                key = key.strip()
                if key not in ("a", "b") or not value:
                    raise InvalidParameterError("kind", f"bad parameter {item!r} in {text!r}")
                try:
                    kwargs[key] = float(value)
                except ValueError:
                    raise InvalidParameterError(key, f"not a number: {value!r}") from None
        return cls(tag, **kwargs)
