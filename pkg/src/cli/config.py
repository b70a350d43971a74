"""
Run configuration for the Rotating Wave Toolkit command line.
"""

import argparse
from dataclasses import dataclass, field, fields
from typing import List, Optional

from ..spectrum.alpha import alpha_n
from ..utils.validators import ValidationError, Validator


def parse_index_range(text: str) -> List[int]:
    """'a..b' (inclusive), 'a,b,c' or a single integer."""
    text = str(text).strip()
    try:
        if '..' in text:
            start, stop = text.split('..', 1)
            return Validator.validate_index_range(int(start), int(stop))
        return [Validator.validate_index(int(part)) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ValidationError(f"Malformed index range {text!r}; use a..b or a comma list")


def parse_float_list(text: str) -> List[float]:
    """Comma separated reals."""
    try:
        values = [float(part) for part in str(text).split(',') if part.strip()]
    except ValueError:
        raise ValidationError(f"Malformed list {text!r}; use comma separated numbers")
    if not values:
        raise ValidationError("Empty list")
    return [Validator.validate_finite("list entry", value) for value in values]


@dataclass
class RunConfig:
    """Every command parameter with its default."""
    command: str
    alpha: Optional[float] = None
    alpha_n: Optional[int] = None
    m: float = 0.0
    m_grid: List[float] = field(default_factory=list)
    p: float = 3.0
    mu: Optional[float] = None
    nu: List[float] = field(default_factory=list)
    k_range: List[int] = field(default_factory=list)
    n_range: List[int] = field(default_factory=list)
    angular: int = 1
    x: float = 1.0
    eps: float = 0.1
    k_min: int = 1
    k_max: int = 200
    ell_max: int = 200
    j_cut: float = 60.0
    kernel_tol: float = 1.0e-9
    tolerance: float = 1.0e-6
    starts: int = 10
    nodes: int = 2000
    solve: bool = False
    workers: Optional[int] = None
    output_format: str = 'json'
    out: Optional[str] = None
    wave: Optional[str] = None
    time: float = 0.0

    GROUND_COMMANDS = ('ground', 'scan')
    ALPHA_COMMANDS = ('spectrum', 'ground', 'scan', 'vk')

    @classmethod
    def from_args(cls, namespace: argparse.Namespace) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        values = {key: value for key, value in vars(namespace).items() if key in known and value is not None}
        for key in ('nu', 'm_grid'):
            if isinstance(values.get(key), str):
                values[key] = parse_float_list(values[key])
        for key in ('k_range', 'n_range'):
            if isinstance(values.get(key), str):
                values[key] = parse_index_range(values[key])
        return cls(**values)

    def validate(self) -> "RunConfig":
        """Range checks before dispatch; raises ValidationError."""
        if self.output_format not in ('json', 'csv'):
            raise ValidationError(f"Unknown output format {self.output_format!r}")
        if self.command in self.ALPHA_COMMANDS:
            if (self.alpha is None) == (self.alpha_n is None):
                raise ValidationError("Give exactly one of --alpha and --alpha-n")
            if self.alpha is not None:
                Validator.validate_velocity(self.alpha)
            else:
                Validator.validate_index(self.alpha_n)
        if self.command in self.GROUND_COMMANDS:
            Validator.validate_exponent(self.p)
        elif self.command in ('radial', 'vk'):
            Validator.validate_exponent(self.p, subcritical=False)
        if self.command in ('spectrum', 'alpha-seq'):
            Validator.validate_cutoffs(self.ell_max, self.k_max)
        if self.command == 'zeros':
            if not self.nu or not self.k_range:
                raise ValidationError("zeros needs --nu and --k")
            Validator.validate_all(Validator.validate_order, self.nu)
        if self.command == 'alpha-seq' and not self.n_range:
            raise ValidationError("alpha-seq needs --n")
        if self.command == 'sandwich':
            Validator.validate_positive("x", self.x)
            Validator.validate_index_range(self.k_min, self.k_max)
        if self.command == 'radial':
            Validator.validate_positive("m", self.m, strict=False)
        if self.command == 'scan' and not self.m_grid:
            raise ValidationError("scan needs --m with at least one mass")
        if self.command == 'vk':
            Validator.validate_index(self.angular)
        if self.command in ('ground', 'scan'):
            Validator.validate_positive("j_cut", self.j_cut)
            Validator.validate_index(self.starts)
        return self

    def velocity(self) -> float:
        """--alpha as given, or alpha_n for --alpha-n."""
        if self.alpha is not None:
            return self.alpha
        return alpha_n(self.alpha_n).alpha
