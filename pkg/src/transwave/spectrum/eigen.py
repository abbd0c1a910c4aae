"""Spectrum of the discrete generator.

The eigenproblem A_h x = λx is the quadratic problem λ²Mx + λCx + Kx = 0 with

    K = [[S_w, C1], [C1, S_s]],  C = [[D1 + D2, C2], [−C2, 0]],  M = blockdiag(Mmass, Mmass)

solved through its first companion linearization [[0, I], [−K, −C]] z = λ [[I, 0], [0, M]] z. The
companion vector z = (x, λx) is ordered exactly like a packed state (p_w, p_s, q_w, q_s).
"""

from typing import Sequence

import jax
import jax.numpy as jnp
import numpy as np
import scipy.linalg
import scipy.sparse.linalg
from loguru import logger

from transwave import constants
from transwave.config import SystemConfig
from transwave.core.jax.pytrees import TreeClass, autoinit, field, frozen_field
from transwave.core.linalg import h_norm
from transwave.errors import ConvergenceFailure, SizeExceeded
from transwave.generator.operator import GeneratorOperator, discretize
from transwave.typing import EigenMode


@autoinit
class SpectrumResult(TreeClass):
    """Eigenvalues of A_h with the stability summaries derived from them."""

    #: Complex eigenvalues sorted by imaginary part.
    eigenvalues: jax.Array = field()

    #: Matching eigenvectors as packed states (columns), normalized to unit energy norm.
    eigenvectors: jax.Array | None = field(default=None)

    #: max Re λ
    spectral_abscissa: float = frozen_field()

    #: min |Re λ|
    imag_axis_gap: float = frozen_field()

    mesh_h: float = frozen_field()
    mode: EigenMode = frozen_field(default="dense")

    @property
    def num_on_imaginary_axis(self) -> int:
        return int(jnp.sum(jnp.abs(jnp.real(self.eigenvalues)) < constants.IMAG_AXIS_TOL))

    @property
    def strongly_stable(self) -> bool:
        """No eigenvalue on or right of the imaginary axis."""
        return self.spectral_abscissa < 0 and self.imag_axis_gap > constants.IMAG_AXIS_TOL


@autoinit
class EigenpairDiagnostics(TreeClass):
    """Independent checks of computed eigenpairs.

    For an eigenpair (λ, x) the dissipation identity reads −Re λ·‖x‖²_H = x_qwᴴ(D1 + D2)x_qw: an eigenvalue
    can only sit on the imaginary axis if its eigenvector is invisible to the damping.
    """

    #: ‖A_h x − λx‖_H / ‖x‖_H per eigenpair.
    residuals: jax.Array = field()

    #: −Re λ·‖x‖²_H per eigenpair.
    damping_lhs: jax.Array = field()

    #: x_qwᴴ(D1 + D2)x_qw per eigenpair.
    damping_rhs: jax.Array = field()

    @property
    def max_residual(self) -> float:
        return float(jnp.max(self.residuals)) if self.residuals.size else 0.0

    @property
    def max_damping_mismatch(self) -> float:
        if not self.damping_lhs.size:
            return 0.0
        return float(jnp.max(jnp.abs(self.damping_lhs - self.damping_rhs)))


def companion_pencil(gen: GeneratorOperator) -> tuple[np.ndarray, np.ndarray]:
    """First companion pencil (A, B) of the quadratic eigenproblem as dense numpy arrays."""
    mats = gen.mats
    n = mats.n
    zeros = jnp.zeros((n, n))
    stiffness = jnp.block([[mats.stiffness_w, mats.coupling_c1], [mats.coupling_c1, mats.stiffness_s]])
    damping = jnp.block([[mats.damping, mats.coupling_c2], [-mats.coupling_c2, zeros]])
    mass = jnp.block([[mats.mass, zeros], [zeros, mats.mass]])
    eye = jnp.eye(2 * n)
    zeros2 = jnp.zeros((2 * n, 2 * n))
    a = jnp.block([[zeros2, eye], [-stiffness, -damping]])
    b = jnp.block([[eye, zeros2], [zeros2, mass]])
    return np.asarray(a), np.asarray(b)


def _summarize(values: np.ndarray, vectors: np.ndarray | None, gen: GeneratorOperator, mode: EigenMode) -> SpectrumResult:
    order = np.lexsort((np.real(values), np.imag(values)))
    values = values[order]
    eigvecs = None
    if vectors is not None:
        vectors = vectors[:, order]
        gram = gen.gram.matrix
        norms = jax.vmap(lambda v: h_norm(gram, v), in_axes=1)(jnp.asarray(vectors))
        eigvecs = jnp.asarray(vectors) / norms[None, :]
    real = np.real(values)
    return SpectrumResult(
        eigenvalues=jnp.asarray(values),
        eigenvectors=eigvecs,
        spectral_abscissa=float(np.max(real)),
        imag_axis_gap=float(np.min(np.abs(real))),
        mesh_h=gen.mesh.h_max,
        mode=mode,
    )


def eigenvalues(
    gen: GeneratorOperator,
    mode: EigenMode = "dense",
    k: int = 20,
    shift: complex = 0.0,
    with_vectors: bool = False,
) -> SpectrumResult:
    """Computes the spectrum of A_h.

    Args:
        gen (GeneratorOperator): Discrete generator.
        mode (EigenMode, optional): ``dense`` returns all 4n eigenvalues, ``iterative`` the ``k`` eigenvalues
            closest to ``shift`` via shift-invert Arnoldi. Defaults to "dense".
        k (int, optional): Number of eigenvalues in iterative mode. Defaults to 20.
        shift (complex, optional): Shift of the iterative mode, typically iω on the imaginary axis. Defaults to 0.
        with_vectors (bool, optional): Also return eigenvectors. Defaults to False.

    Returns:
        SpectrumResult: eigenvalues and stability summaries.
    """
    a, b = companion_pencil(gen)
    if mode == "dense":
        if gen.n > constants.MAX_DENSE_DOF:
            raise SizeExceeded(f"n={gen.n} DOFs per chain exceeds the dense limit {constants.MAX_DENSE_DOF}")
        logger.debug(f"Dense generalized eigensolve of dimension {a.shape[0]}")
        if with_vectors:
            values, vectors = scipy.linalg.eig(a, b)
        else:
            values, vectors = scipy.linalg.eig(a, b, right=False), None
    elif mode == "iterative":
        k = min(k, a.shape[0] - 2)
        logger.debug(f"Shift-invert Arnoldi for {k} eigenvalues near {shift}")
        try:
            values, vectors = scipy.sparse.linalg.eigs(
                a.astype(np.complex128),
                k=k,
                M=b,
                sigma=shift,
                return_eigenvectors=True,
            )
        except scipy.sparse.linalg.ArpackNoConvergence as e:
            raise ConvergenceFailure(f"Arnoldi iteration did not converge: {e}") from e
        if not with_vectors:
            vectors = None
    else:
        raise ValueError(f"Unknown eigenvalue mode: {mode}")

    result = _summarize(np.asarray(values), vectors, gen, mode)
    logger.info(
        f"Spectrum ({mode}, {result.eigenvalues.size} eigenvalues): abscissa={result.spectral_abscissa:.6g}, "
        f"imaginary-axis gap={result.imag_axis_gap:.6g}"
    )
    return result


def eigenpair_diagnostics(gen: GeneratorOperator, result: SpectrumResult) -> EigenpairDiagnostics:
    """Residual and dissipation checks for every eigenpair of ``result``."""
    if result.eigenvectors is None:
        raise ValueError("Eigenpair diagnostics need eigenvectors, compute the spectrum with with_vectors=True")
    gram = gen.gram.matrix
    n = gen.n
    damping = gen.mats.damping

    def check(lam: jax.Array, x: jax.Array) -> tuple[jax.Array, jax.Array, jax.Array]:
        norm = h_norm(gram, x)
        residual = h_norm(gram, gen.matrix @ x - lam * x) / norm
        q_w = x[2 * n : 3 * n]
        lhs = -jnp.real(lam) * norm**2
        rhs = jnp.real(jnp.vdot(q_w, damping @ q_w))
        return residual, lhs, rhs

    residuals, lhs, rhs = jax.vmap(check, in_axes=(0, 1))(result.eigenvalues, result.eigenvectors)
    return EigenpairDiagnostics(residuals=residuals, damping_lhs=lhs, damping_rhs=rhs)


@autoinit
class AbscissaStudy(TreeClass):
    """Spectral abscissa and imaginary-axis gap over a sequence of mesh sizes."""

    h_values: tuple[float, ...] = frozen_field()
    abscissas: tuple[float, ...] = frozen_field()
    gaps: tuple[float, ...] = frozen_field()

    def rows(self) -> list[dict[str, float]]:
        return [
            {"h": h, "spectral_abscissa": a, "imag_axis_gap": g}
            for h, a, g in zip(self.h_values, self.abscissas, self.gaps)
        ]


def abscissa_study(cfg: SystemConfig, h_values: Sequence[float]) -> AbscissaStudy:
    """Tracks how the spectral abscissa moves as the mesh is refined.

    In the a₂ ≠ 1 regime the abscissa is expected to drift toward 0, reflecting the lack of uniform
    exponential stability of the continuous system.
    """
    abscissas, gaps = [], []
    for h in h_values:
        result = eigenvalues(discretize(cfg, h))
        abscissas.append(result.spectral_abscissa)
        gaps.append(result.imag_axis_gap)
    return AbscissaStudy(h_values=tuple(float(h) for h in h_values), abscissas=tuple(abscissas), gaps=tuple(gaps))
