"""Lower-bound certificates for the block rate-distortion value.

A certificate is a triple (lam, gamma, p') with gamma a positive weight per
source block and p' a reverse-direction causal kernel (factors
p'(x_i | x^{i-1}, x̂^i)).  Whenever the feasibility constraint

    p(x^n) * gamma(x^n) * 2^{-lam d(x^n, x̂^n)}  <=  p'(x^n || x̂^n)

holds for every pair of blocks, (1/n)(-lam D + sum_x p log2 gamma) is a valid
lower bound on the optimal rate at distortion D.  Certificates assembled from
a converged solver state are tight: the bound matches the primal rate to
within the solver's stopping threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .models import DistortionTensor
from .prob import (
    BlockSource,
    CausalKernel,
    ForwardChannel,
    NORM_TOL,
    causal_factors_from_joint,
    reverse_causal_factors,
)
from .solver import RatePoint


class NonTightCertificateError(ValueError):
    """The certificate does not pin down a channel (constraint slack on the
    support is too large for the reconstruction to normalize)."""


@dataclass(frozen=True)
class DualCertificate:
    """Lower-bound certificate (lam, gamma, p').

    ``p_prime_factors[i-1]`` has axes (x_1..x_i, x̂_1..x̂_i) and rows over x_i
    (axis i-1) summing to one for every context.
    """

    lam: float
    n: int
    src_alphabet_size: int
    rec_alphabet_size: int
    gamma: np.ndarray
    p_prime_factors: tuple = field(repr=False)

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        g = np.ascontiguousarray(np.asarray(self.gamma, dtype=float))
        if g.shape != (self.src_alphabet_size**self.n,):
            raise ValueError("gamma must have one entry per source block")
        if np.any(g <= 0):
            raise ValueError("gamma must be strictly positive")
        object.__setattr__(self, "gamma", g)
        facs = tuple(np.asarray(f, dtype=float) for f in self.p_prime_factors)
        A, B = self.src_alphabet_size, self.rec_alphabet_size
        for i, f in enumerate(facs, start=1):
            if f.shape != (A,) * i + (B,) * i:
                raise ValueError(f"factor {i} has wrong shape {f.shape}")
        object.__setattr__(self, "p_prime_factors", facs)

    @property
    def p_prime_table(self) -> np.ndarray:
        """Dense p'(x^n || x̂^n) over (x^n, x̂^n), product of the factors."""
        A, B, n = self.src_alphabet_size, self.rec_alphabet_size, self.n
        full = np.ones((A,) * n + (B,) * n)
        for i, f in enumerate(self.p_prime_factors, start=1):
            full = full * f.reshape((A,) * i + (1,) * (n - i) + (B,) * i + (1,) * (n - i))
        return full.reshape(A**n, B**n)

    def to_json(self) -> str:
        return json.dumps({
            "lam": self.lam,
            "n": self.n,
            "src_alphabet_size": self.src_alphabet_size,
            "rec_alphabet_size": self.rec_alphabet_size,
            "gamma": self.gamma.tolist(),
            "p_prime_factors": [f.tolist() for f in self.p_prime_factors],
        })

    @staticmethod
    def from_json(text: str) -> "DualCertificate":
        d = json.loads(text)
        return DualCertificate(
            lam=float(d["lam"]), n=int(d["n"]),
            src_alphabet_size=int(d["src_alphabet_size"]),
            rec_alphabet_size=int(d["rec_alphabet_size"]),
            gamma=np.asarray(d["gamma"], dtype=float),
            p_prime_factors=tuple(np.asarray(f, dtype=float) for f in d["p_prime_factors"]),
        )


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    max_violation: float
    max_normalization_error: float


def gamma_from_kernel(kernel: CausalKernel, distortion: DistortionTensor,
                      lam: float) -> np.ndarray:
    """gamma(x^n) = (sum_{x̂^n} q(x̂^n||x^{n-s}) 2^{-lam d})^{-1}."""
    denom = (kernel.probs * np.exp2(-lam * distortion.values)).sum(axis=1)
    if np.any(denom <= 0):
        raise ValueError("kernel must be strictly positive")
    return 1.0 / denom


def dual_objective(lam: float, gamma: np.ndarray, source: BlockSource, D: float) -> float:
    """(1/n)(-lam*D + sum_x p(x^n) log2 gamma(x^n)) in bits per symbol."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g <= 0):
        raise ValueError("gamma must be strictly positive")
    return float(-lam * D + source.probs @ np.log2(g)) / source.n


def check_feasibility(cert: DualCertificate, source: BlockSource,
                      distortion: DistortionTensor, tol: float = 1e-9) -> FeasibilityReport:
    """Verify the certificate's constraint in the log domain.

    Checks every factor's per-context normalization and, for each block pair,
    log2 p + log2 gamma - lam*d - log2 p' <= 0.  The largest positive excess
    (in bits) is reported as ``max_violation``; entries where p' = 0 but the
    left side has mass count as infinite violations.
    """
    norm_err = 0.0
    for i, f in enumerate(cert.p_prime_factors, start=1):
        sums = f.sum(axis=i - 1)
        norm_err = max(norm_err, float(np.max(np.abs(sums - 1.0))))
    pp = cert.p_prime_table
    lhs = source.probs[:, None] * cert.gamma[:, None] * np.exp2(-cert.lam * distortion.values)
    viol = 0.0
    zero_pp = pp <= 0.0
    if np.any(lhs[zero_pp] > 0.0):
        viol = np.inf
    active = lhs > 0.0
    ok = active & ~zero_pp
    if np.any(ok):
        excess = np.log2(lhs[ok]) - np.log2(pp[ok])
        viol = max(viol, float(np.max(excess)))
    viol = max(viol, 0.0)
    return FeasibilityReport(feasible=viol <= tol and norm_err <= NORM_TOL * 10,
                             max_violation=viol, max_normalization_error=norm_err)


def certificate_from_solution(point: RatePoint, source: BlockSource,
                              distortion: DistortionTensor) -> DualCertificate:
    """Assemble a feasible certificate from a converged solver state.

    gamma comes from the final kernel's tilted sums, deflated by the largest
    kernel-update ratio so the constraint holds exactly even short of the
    fixed point; p' is the reverse causal factorization of the final joint.
    The resulting dual objective sits within F/n below the primal rate.
    """
    q_star = point.kernel
    if q_star.delay != 1 or q_star.ff_map is not None:
        raise ValueError("certificates require a delay-1 solve without a feed-forward map")
    lam = point.lam
    n, A = source.n, source.src_alphabet_size
    B = q_star.rec_alphabet_size
    # Run one more update pair from the returned kernel: gamma is defined from
    # the kernel that generates the channel, and the deflation needs the ratio
    # of the kernel after that channel to the one before it.
    tilt = np.exp2(-lam * distortion.values)
    num = q_star.probs * tilt
    denom = num.sum(axis=1, keepdims=True)
    r = num / denom
    joint = source.probs[:, None] * r
    q_next, _ = causal_factors_from_joint(joint, n, A, B, 1, None)
    gamma_raw = 1.0 / denom[:, 0]
    max_c = float(np.max(q_next / q_star.probs))
    gamma = gamma_raw / max(max_c, 1.0)
    _, factors = reverse_causal_factors(joint, n, A, B)
    return DualCertificate(lam=lam, n=n, src_alphabet_size=A, rec_alphabet_size=B,
                           gamma=gamma, p_prime_factors=tuple(factors))


def reconstruct_channel(cert: DualCertificate, source: BlockSource,
                        max_iters: int = 10_000, tol: float = 1e-12,
                        tight_tol: float = 1e-6) -> ForwardChannel:
    """Recover the optimal forward channel from a tight certificate.

    The pair (r*, q*) at the optimum satisfies r* = p' q* / p row-wise, and
    q* is the causal kernel of p * r*; the channel is found as the fixed point
    of that pair of relations, iterated from the uniform kernel.  If the
    certificate is not tight the row sums of p' q / p drift from one and a
    ``NonTightCertificateError`` is raised.
    """
    n, A, B = cert.n, cert.src_alphabet_size, cert.rec_alphabet_size
    p = source.probs
    pp = cert.p_prime_table
    support = p > 0.0

    def step(q):
        num = pp * q
        rows = num.sum(axis=1)
        r = np.full_like(num, 1.0 / B**n)
        r[support] = num[support] / rows[support, None]
        q_next, _ = causal_factors_from_joint(p[:, None] * r, n, A, B, 1, None)
        return q_next, r, rows

    q = np.full((A**n, B**n), float(B) ** (-n))
    # Plain iteration first: the map contracts toward the fixed point but its
    # linearization has unit eigenvalues along a manifold of equal-objective
    # kernels, so the tail is far too slow on its own.  A short warm start
    # gets into the basin; Anderson acceleration then removes the degenerate
    # slow modes and converges in a handful of extra steps.
    warmup = min(200, max_iters)
    for _ in range(warmup):
        q, r, rows = step(q)
    memory = 5
    x = q.ravel()
    res_hist, x_hist = [], []
    for _ in range(max(0, max_iters - warmup)):
        q_next, r, rows = step(x.reshape(A**n, B**n))
        g = q_next.ravel()
        f = g - x
        if float(np.max(np.abs(f))) < tol:
            x = g
            break
        res_hist.append(f)
        x_hist.append(x)
        if len(res_hist) > memory + 1:
            res_hist.pop(0)
            x_hist.pop(0)
        m = len(res_hist) - 1
        if m == 0:
            x = g
            continue
        dF = np.stack([res_hist[i + 1] - res_hist[i] for i in range(m)], axis=1)
        dX = np.stack([x_hist[i + 1] - x_hist[i] for i in range(m)], axis=1)
        coef, *_ = np.linalg.lstsq(dF, f, rcond=None)
        x_new = x + f - (dX + dF) @ coef
        if np.any(x_new <= 0.0) or not np.all(np.isfinite(x_new)):
            x = g  # fall back to the plain step if acceleration leaves the domain
        else:
            x = x_new
    q_final, r, rows = step(x.reshape(A**n, B**n))
    worst = float(np.max(np.abs(rows[support] - p[support]) / p[support]))
    if worst > tight_tol:
        raise NonTightCertificateError(
            f"certificate is not tight: channel rows deviate by {worst:.3e}")
    return ForwardChannel(n=n, src_alphabet_size=A, rec_alphabet_size=B, probs=r)


def slope_at(lam: float, n: int) -> float:
    """Slope of the rate-distortion curve at the point swept by lam: -lam/n."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    return -lam / n
