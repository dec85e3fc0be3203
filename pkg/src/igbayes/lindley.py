"""
Lindley's asymptotic approximation to posterior means for the (mu, lam)
model with independent gamma priors.

Vague prior pi(mu | lam) ~ const, pi(lam) ~ 1/lam is the hyperparameter
setting ``PriorHyper.vague()`` = (1, 0, 0, 0); no separate code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import DomainError
from .estimators import LINDLEY, PointEstimates


@dataclass(frozen=True)
class PriorHyper:
    """Gamma(a, b) prior on mu and Gamma(c, d) prior on lambda (shape, rate)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise DomainError(f"prior hyperparameters must be non-negative, got {self}")

    @classmethod
    def vague(cls) -> PriorHyper:
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def parse(cls, text: str) -> PriorHyper:
        parts = [float(t) for t in text.replace(" ", "").split(",") if t]
        if len(parts) != 4:
            raise DomainError(f"prior needs four values a,b,c,d, got {text!r}")
        return cls(*parts)

    @property
    def informative(self) -> bool:
        return min(self.a, self.b, self.c, self.d) > 0

    @property
    def mu_proper(self) -> bool:
        """Whether the mu full conditional is integrable without truncation."""
        return self.b > 0

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class LindleyTerms:
    """
    Ingredients of the two-parameter Lindley expansion, evaluated at the MLE:
    third log-likelihood derivatives, the inverse observed information and
    the log-prior gradient.
    """

    L111: float
    L112: float
    L122: float
    L222: float
    sigma11: float
    sigma12: float
    sigma22: float
    rho1: float
    rho2: float
    mu_hat: float
    lam_hat: float


def lindley_terms(mle: PointEstimates, n: int, prior: PriorHyper) -> LindleyTerms:
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    m, lam = mle.mu, mle.lam
    if not (m > 0 and lam > 0):
        raise DomainError("MLE must be positive")
    return LindleyTerms(
        L111=6.0 * n * lam / m**4,
        L112=-n / m**3,
        L122=0.0,
        L222=n / lam**3,
        sigma11=m**3 / (n * lam),
        sigma12=0.0,
        sigma22=2.0 * lam**2 / n,
        rho1=(prior.a - 1.0) / m - prior.b,
        rho2=(prior.c - 1.0) / lam - prior.d,
        mu_hat=m,
        lam_hat=lam,
    )


def lindley_estimates(mle: PointEstimates, n: int, prior: PriorHyper) -> PointEstimates:
    """Closed-form Lindley posterior means of mu and lambda.

    The lambda component may be negative when ``d`` is large relative to
    ``n``; it is returned unclamped (check ``.valid``).
    """
    lindley_terms(mle, n, prior)  # validation only
    m, lam = mle.mu, mle.lam
    a, b, c, d = prior.as_tuple()
    mu_l = m + (a + 2.0) * m**2 / (n * lam) - b * m**3 / (n * lam)
    lam_l = lam + (2.0 * c - 1.0) * lam / n - 2.0 * d * lam**2 / n
    return PointEstimates(mu_l, lam_l, LINDLEY)


@dataclass(frozen=True)
class UDerivs:
    """A function u(mu, lam) with its gradient and Hessian, as callables of (mu, lam)."""

    u: Callable[[float, float], float]
    grad: Callable[[float, float], Sequence[float]]
    hess: Callable[[float, float], Sequence[Sequence[float]]]


U_MU = UDerivs(lambda m, l: m, lambda m, l: (1.0, 0.0), lambda m, l: ((0.0, 0.0), (0.0, 0.0)))
U_LAMBDA = UDerivs(lambda m, l: l, lambda m, l: (0.0, 1.0), lambda m, l: ((0.0, 0.0), (0.0, 0.0)))


def lindley_general(u: UDerivs, t: LindleyTerms) -> float:
    """
    Lindley's two-parameter expansion of E(u | x):

        u + 1/2 sum_ij u_ij s_ij + sum_j U_j rho_j
          + 1/2 L111 s11 U1 + 1/2 L112 (2 s12 U1 + s11 U2)
          + 1/2 L122 (s22 U1 + 2 s12 U2) + 1/2 L222 s22 U2

    with U_k = sum_i u_i s_ki.
    """
    m, lam = t.mu_hat, t.lam_hat
    u1, u2 = u.grad(m, lam)
    (u11, u12), (u21, u22) = u.hess(m, lam)
    s11, s12, s22 = t.sigma11, t.sigma12, t.sigma22
    U1 = u1 * s11 + u2 * s12
    U2 = u1 * s12 + u2 * s22
    return (
        u.u(m, lam)
        + 0.5 * (u11 * s11 + u12 * s12 + u21 * s12 + u22 * s22)
        + U1 * t.rho1
        + U2 * t.rho2
        + 0.5 * t.L111 * s11 * U1
        + 0.5 * t.L112 * (2.0 * s12 * U1 + s11 * U2)
        + 0.5 * t.L122 * (s22 * U1 + 2.0 * s12 * U2)
        + 0.5 * t.L222 * s22 * U2
    )
