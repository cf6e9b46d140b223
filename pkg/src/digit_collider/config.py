"""Configuration for digit-collider."""

import math
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Union

from .const import DEFAULT_EPSILON, DEFAULT_SEED, DEFAULT_THREADS, THREADS_ENV_VAR
from .errors import InvalidParamsError


class ParamsMode(str, Enum):
    PAPER = "paper"
    MANUAL = "manual"


class OutputFormat(str, Enum):
    JSONL = "jsonl"
    CSV = "csv"
    BFILE = "bfile"
    PRETTY = "pretty"


def minimal_nu(beta: int) -> int:
    """Smallest nu >= 1 with 2^(nu - 1) >= 3^beta."""
    return (3**beta - 1).bit_length() + 1


@dataclass(frozen=True)
class Params:
    """Parameters of the residue-class construction."""

    eta: int
    """Ternary block length (multiple of 4)."""

    m: int
    """Step between the values f is corrected by."""

    J: int
    """Shifts are indexed by j in [-J, J]."""

    beta: int
    """(2J + 1) * eta + 1, ternary length of the key K."""

    nu: int
    """Minimal with 2^(nu - 1) >= 3^beta, binary length of the anchor class."""

    mode: ParamsMode = ParamsMode.MANUAL

    lam: Optional[int] = None
    """floor(log N) (paper mode only)."""

    fineness: Optional[int] = None
    """floor((log lambda)^(1/2 + epsilon)) (paper mode only)."""

    epsilon: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.eta < 4) or (self.eta % 4 != 0):
            raise InvalidParamsError(
                f"eta must be a positive multiple of 4 (got {self.eta})"
            )

        if self.m < 1:
            raise InvalidParamsError(f"m must be at least 1 (got {self.m})")

        if self.J < 0:
            raise InvalidParamsError(f"J must be nonnegative (got {self.J})")

        if self.beta != (2 * self.J + 1) * self.eta + 1:
            raise InvalidParamsError(
                f"beta inconsistent with eta={self.eta}, J={self.J}"
            )

        if self.nu != minimal_nu(self.beta):
            raise InvalidParamsError(f"nu is not minimal for beta={self.beta}")

    @property
    def modulus(self) -> int:
        """2^nu * 3^beta, the modulus of the constructed residue class."""
        return (1 << self.nu) * 3**self.beta

    @staticmethod
    def manual(eta: int, m: int, J: int) -> "Params":
        """Parameters with explicitly chosen eta, m, and J."""
        if J < 0:
            raise InvalidParamsError(f"J must be nonnegative (got {J})")

        beta = (2 * J + 1) * eta + 1
        return Params(
            eta=eta, m=m, J=J, beta=beta, nu=minimal_nu(beta), mode=ParamsMode.MANUAL
        )

    @staticmethod
    def paper(
        N: Optional[int] = None,
        epsilon: float = DEFAULT_EPSILON,
        log_n: Optional[float] = None,
    ) -> "Params":
        """
        Parameters derived from N by the floor scheme.

        :param N: Lower end of the search interval [N, 2N).
        :param epsilon: Positive exponent of log log N.
        :param log_n: Natural logarithm of N, for N too large to write down.
        :return: Parameters in paper mode.
        """
        if epsilon <= 0:
            raise InvalidParamsError(f"epsilon must be positive (got {epsilon})")

        if log_n is None:
            if (N is None) or (N < 4):
                raise InvalidParamsError(f"N must be at least 4 (got {N})")

            log_n = math.log(N)

        lam0 = float(log_n)
        if lam0 < math.log(4):
            raise InvalidParamsError(f"log N must be at least log 4 (got {lam0})")

        f0 = math.log(lam0) ** (0.5 + epsilon)
        m0 = math.sqrt(lam0) / f0
        J0 = f0**2

        # eta = 4 * floor(lam0^(3/4) / 4), corrected against float rounding
        lam0_cubed = lam0**3
        quarter = int(lam0**0.75 / 4)
        while (4 * (quarter + 1)) ** 4 <= lam0_cubed:
            quarter += 1

        while (quarter > 0) and ((4 * quarter) ** 4 > lam0_cubed):
            quarter -= 1

        eta = 4 * quarter
        m = int(m0)
        J = int(J0)
        if (eta < 4) or (m < 1) or (J < 1):
            raise InvalidParamsError(
                f"N too small for paper-mode parameters (eta={eta}, m={m}, J={J}); "
                "use manual mode"
            )

        beta = (2 * J + 1) * eta + 1
        return Params(
            eta=eta,
            m=m,
            J=J,
            beta=beta,
            nu=minimal_nu(beta),
            mode=ParamsMode.PAPER,
            lam=int(lam0),
            fineness=int(f0),
            epsilon=epsilon,
        )

    @staticmethod
    def from_dict(config: dict[str, Any]) -> "Params":
        """Load parameters from a dictionary."""
        return Params(
            eta=int(config["eta"]),
            m=int(config["m"]),
            J=int(config["J"]),
            beta=int(config["beta"]),
            nu=int(config["nu"]),
            mode=ParamsMode(config.get("mode", ParamsMode.MANUAL)),
            lam=config.get("lambda"),
            fineness=config.get("fineness"),
            epsilon=config.get("epsilon"),
        )

    def to_dict(self) -> dict[str, Any]:
        """Convert parameters to a dictionary."""
        params_dict: dict[str, Any] = {
            "eta": self.eta,
            "m": self.m,
            "J": self.J,
            "beta": self.beta,
            "nu": self.nu,
            "mode": self.mode.value,
        }

        if self.mode == ParamsMode.PAPER:
            params_dict["lambda"] = self.lam
            params_dict["fineness"] = self.fineness
            params_dict["epsilon"] = self.epsilon

        return params_dict


def make_params(**spec: Any) -> Params:
    """Parameters from either {N, epsilon} (paper mode) or {eta, m, J}."""
    if {"eta", "m", "J"} <= spec.keys():
        return Params.manual(int(spec["eta"]), int(spec["m"]), int(spec["J"]))

    if ("N" in spec) or ("log_n" in spec):
        return Params.paper(
            N=spec.get("N"),
            epsilon=spec.get("epsilon", DEFAULT_EPSILON),
            log_n=spec.get("log_n"),
        )

    raise InvalidParamsError(f"Expected N or eta/m/J, got: {sorted(spec)}")


@dataclass
class RunConfig:
    """Settings shared by all subcommands."""

    subcommand: str

    seed: int = DEFAULT_SEED
    """Seed for all randomized operations."""

    threads: int = DEFAULT_THREADS
    """Worker processes for enumerations and sampling."""

    output_format: OutputFormat = OutputFormat.JSONL

    output_path: Optional[Path] = None
    """Write results here instead of stdout."""

    def __post_init__(self) -> None:
        if self.threads < 1:
            raise InvalidParamsError(f"threads must be at least 1 (got {self.threads})")

    @staticmethod
    def resolve_threads(threads: Optional[int]) -> int:
        """Threads from the command line, else the environment, else the default."""
        if threads is not None:
            return threads

        env_threads = os.environ.get(THREADS_ENV_VAR)
        if env_threads:
            try:
                return int(env_threads)
            except ValueError as err:
                raise InvalidParamsError(
                    f"{THREADS_ENV_VAR} must be an integer (got {env_threads!r})"
                ) from err

        return DEFAULT_THREADS

    @staticmethod
    def from_args(
        subcommand: str,
        seed: Optional[int],
        threads: Optional[int],
        output_format: Union[str, OutputFormat, None],
        output_path: Optional[str],
    ) -> "RunConfig":
        return RunConfig(
            subcommand=subcommand,
            seed=DEFAULT_SEED if seed is None else seed,
            threads=RunConfig.resolve_threads(threads),
            output_format=OutputFormat(output_format or OutputFormat.JSONL),
            output_path=Path(output_path) if output_path else None,
        )
