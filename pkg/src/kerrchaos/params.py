"""Physical and numerical parameters of a kicked-Kerr run."""

from dataclasses import asdict, dataclass, fields, replace
import math

from .errors import InvalidDimensionError, InvalidParameterError

KICK_METHODS = ("spectral", "laguerre", "expm")


@dataclass(frozen=True)
class SystemParams:
    """Parameters of the stroboscopic map.

    ``kerr_factor`` multiplies the free-evolution exponent: the phase applied
    to |n> between kicks is ``exp(-i * kerr_factor * chi * period * n(n-1))``.
    The default 0.5 is the propagator of the Hamiltonian chi/2 (a+)^2 a^2;
    1.0 gives the bare ``exp(-i chi T n(n-1))`` form.

    ``kick_method`` selects how the kick unitary is built on the truncated
    space (see :func:`kerrchaos.fock.make_kick_matrix`).
    """

    chi: float = 1.0
    period: float = math.pi
    epsilon: float = 0.1
    delta_epsilon: float = 0.001
    dim: int = 128
    buffer: int = 64
    kicks: int = 1000
    kerr_factor: float = 0.5
    kick_method: str = "spectral"

    def __post_init__(self):
        for name in ("chi", "period", "epsilon", "delta_epsilon", "kerr_factor"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
        if self.chi <= 0:
            raise InvalidParameterError("chi must be > 0")
        if self.period <= 0:
            raise InvalidParameterError("period must be > 0")
        if self.epsilon < 0 or self.delta_epsilon < 0:
            raise InvalidParameterError("epsilon and delta_epsilon must be >= 0")
        if int(self.dim) != self.dim or self.dim < 2:
            raise InvalidDimensionError(f"dim must be an integer >= 2, got {self.dim!r}")
        if int(self.buffer) != self.buffer or self.buffer < 0:
            raise InvalidDimensionError(f"buffer must be an integer >= 0, got {self.buffer!r}")
        if int(self.kicks) != self.kicks or self.kicks < 0:
            raise InvalidParameterError(f"kicks must be an integer >= 0, got {self.kicks!r}")
        if self.kick_method not in KICK_METHODS:
            raise InvalidParameterError(
                f"kick_method must be one of {KICK_METHODS}, got {self.kick_method!r}"
            )

    @property
    def chi_t(self):
        return self.chi * self.period

    def with_(self, **changes):
        return replace(self, **changes)

    def as_dict(self):
        return asdict(self)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]
