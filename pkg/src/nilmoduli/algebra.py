"""Structure constants, brackets and the exterior calculus of the built-in
6-dimensional nilpotent Lie algebras.

Conventions.  An algebra is stored through its structure constants c^k_{ij}
defined by de^k = sum_{i<j} c^k_{ij} e^{ij}, which by d(theta)(X, Y) =
-theta([X, Y]) is equivalent to e^k([e_i, e_j]) = -c^k_{ij}.  Both the c
tensor and the bracket tensor (its negative) are kept antisymmetric in
(i, j).  The five built-ins h2, h4, h5, h6, h9 follow the Salamon strings

    h2 = (0,0,0,0,12,34)        h4 = (0,0,0,0,12,14+23)
    h5 = (0,0,0,0,13+42,14+23)  h6 = (0,0,0,0,12,13)
    h9 = (0,0,0,0,12,14+25)

and h9hat is the same algebra in the hat basis (swap 1<->2, 3<->4), where
the nontrivial brackets are [ê1,ê2] = +ê5, [ê1,ê5] = [ê2,ê3] = -ê6.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace

import numpy as np

from .errors import AlgebraMismatch, NotNilpotent, ParseError, SingularMatrix
from .linalg import max_norm

DIM = 6
BUILTIN_SALAMON = {
    "h2": "(0,0,0,0,12,34)",
    "h4": "(0,0,0,0,12,14+23)",
    "h5": "(0,0,0,0,13+42,14+23)",
    "h6": "(0,0,0,0,12,13)",
    "h9": "(0,0,0,0,12,14+25)",
}
BUILTIN_IDS = ("h2", "h4", "h5", "h6", "h9", "h9hat")

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class LieAlgebra:
    """6-dimensional Lie algebra given by its structure-constant tensor.

    ``c[k, i, j]`` is the coefficient of e^{ij} in de^k, stored
    antisymmetrically in (i, j).
    """

    c: np.ndarray
    label: str = "custom"
    dim: int = DIM

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.shape != (self.dim,) * 3:
            raise ValueError("structure tensor must be dim x dim x dim")
        if max_norm(c + np.swapaxes(c, 1, 2)) > 0.0:
            c = 0.5 * (c - np.swapaxes(c, 1, 2))
        object.__setattr__(self, "c", c)

    @property
    def bracket_tensor(self):
        """b[k, i, j] = e^k-component of [e_i, e_j] (equals -c[k, i, j])."""
        return -self.c

    def basis_vector(self, i):
        v = np.zeros(self.dim)
        v[i] = 1.0
        return v

    def to_json_dict(self):
        return {"label": self.label, "dim": self.dim, "d": render_salamon(self).strip("()").split(",")}

    def __eq__(self, other):
        if not isinstance(other, LieAlgebra):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.c, other.c)


@dataclass(frozen=True, eq=False)
class TwoForm:
    """Coefficients on the basis e^{ij}, i < j; stored strictly upper."""

    coeffs: np.ndarray

    def __post_init__(self):
        m = np.triu(np.asarray(self.coeffs, dtype=float), 1)
        object.__setattr__(self, "coeffs", m)

    def __getitem__(self, idx):
        i, j = idx
        if i < j:
            return self.coeffs[i, j]
        if i > j:
            return -self.coeffs[j, i]
        return 0.0

    def max_norm(self):
        return max_norm(self.coeffs)

    def __add__(self, other):
        return TwoForm(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return TwoForm(self.coeffs - other.coeffs)


@dataclass(frozen=True, eq=False)
class AlmostComplexStructure:
    """J with J^2 = -I (checked at construction) plus an algebra tag."""

    matrix: np.ndarray
    algebra: str = "custom"
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        j = np.asarray(self.matrix, dtype=float)
        if j.shape != (DIM, DIM):
            raise ValueError("J must be 6x6")
        object.__setattr__(self, "matrix", j)
        res = max_norm(j @ j + np.eye(DIM))
        if res > self.tol:
            raise ValueError(f"J^2 + I has max-norm {res:.3e} > {self.tol:.1e}")

    def involution_residual(self):
        return max_norm(self.matrix @ self.matrix + np.eye(DIM))


_PAIR_RE = re.compile(r"^\d\d$")


def parse_salamon(text):
    """Parse a Salamon notation string into a LieAlgebra.

    A token such as "42" with the larger index first is the oriented
    product e^{42} = -e^{24} (the paper writes h5 = (0,0,0,0,13+42,14+23)).
    The triangularity convention, both indices of a pair in de^k strictly
    below k, is enforced; it guarantees nilpotency of valid inputs.
    """
    stripped = text.strip()
    body = stripped[1:-1] if stripped.startswith("(") and stripped.endswith(")") else stripped
    tokens = [t.strip() for t in body.split(",")]
    if len(tokens) != DIM:
        raise ParseError(f"expected 6 comma-separated tokens, got {len(tokens)}", (0, 0))
    c = np.zeros((DIM, DIM, DIM))
    for k, token in enumerate(tokens):
        if token == "0":
            continue
        if not token:
            raise ParseError(f"empty token at position {k + 1}", (k, 0))
        offset = 0
        for part in token.split("+"):
            part = part.strip()
            if not _PAIR_RE.match(part):
                raise ParseError(f"malformed pair {part!r} in token {k + 1}", (k, offset))
            i, j = int(part[0]), int(part[1])
            if not (1 <= i <= 6 and 1 <= j <= 6):
                raise ParseError(f"index out of range in {part!r}", (k, offset))
            if i == j:
                raise ParseError(f"repeated index in pair {part!r}", (k, offset))
            if max(i, j) > k:  # k is 0-based; need i, j < k+1
                raise ParseError(
                    f"pair {part!r} in de^{k + 1} violates the triangularity "
                    "convention (both indices must be < the differential index)",
                    (k, offset),
                )
            a, b = i - 1, j - 1
            sign = 1.0
            if a > b:
                a, b = b, a
                sign = -1.0
            c[k, a, b] += sign
            c[k, b, a] -= sign
            offset += len(part) + 1
    return LieAlgebra(c=c, label="custom")


def render_salamon(alg):
    """Inverse of parse_salamon for algebras with constants in {0, +-1}."""
    tokens = []
    for k in range(DIM):
        parts = []
        for i in range(DIM):
            for j in range(i + 1, DIM):
                v = alg.c[k, i, j]
                if v == 0.0:
                    continue
                if v == 1.0:
                    parts.append(f"{i + 1}{j + 1}")
                elif v == -1.0:
                    parts.append(f"{j + 1}{i + 1}")
                else:
                    raise ValueError("structure constants are not in {0, +-1}")
        tokens.append("+".join(parts) if parts else "0")
    return "(" + ",".join(tokens) + ")"


def builtin(identifier):
    """One of h2, h4, h5, h6, h9 (Salamon strings above) or h9hat."""
    if identifier == "h9hat":
        c = np.zeros((DIM, DIM, DIM))
        # [ê1,ê2] = +ê5, [ê1,ê5] = [ê2,ê3] = -ê6; e^k([e_i,e_j]) = -c^k_{ij}
        for k, i, j, value in ((4, 0, 1, -1.0), (5, 0, 4, 1.0), (5, 1, 2, 1.0)):
            c[k, i, j] += value
            c[k, j, i] -= value
        return LieAlgebra(c=c, label="h9hat")
    if identifier not in BUILTIN_SALAMON:
        raise KeyError(f"unknown builtin {identifier!r}; choose from {BUILTIN_IDS}")
    alg = parse_salamon(BUILTIN_SALAMON[identifier])
    return replace(alg, label=identifier)


def get_algebra(spec):
    """Resolve a builtin id, a Salamon string, or pass through a LieAlgebra."""
    if isinstance(spec, LieAlgebra):
        return spec
    if spec in BUILTIN_IDS:
        return builtin(spec)
    return parse_salamon(spec)


def change_of_basis(alg, p, cond_max=1e12):
    """Algebra in the basis f_i = P e_i, i.e. [x, y]' = P^{-1} [Px, Py]."""
    p = np.asarray(p, dtype=float)
    s = np.linalg.svd(p, compute_uv=False)
    if s[-1] == 0.0 or s[0] / s[-1] > cond_max:
        raise SingularMatrix("change-of-basis matrix is numerically singular")
    pinv = np.linalg.inv(p)
    b = alg.bracket_tensor
    b_new = np.einsum("mk,kpq,pi,qj->mij", pinv, b, p, p, optimize=True)
    return LieAlgebra(c=-b_new, label="custom")


def bracket(alg, x, y):
    """[x, y] in coordinates of the working basis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.einsum("kij,i,j->k", alg.bracket_tensor, x, y)


def jacobi_residual(alg):
    """Max-norm of the Jacobi cyclic sum over all basis triples."""
    b = alg.bracket_tensor
    # [[e_i, e_j], e_k]_m = b[m, p, k] b[p, i, j]
    bb = np.einsum("mpk,pij->mijk", b, b, optimize=True)
    cyc = bb + np.transpose(bb, (0, 3, 1, 2)) + np.transpose(bb, (0, 2, 3, 1))
    return max_norm(cyc)


def exterior_derivative(alg, theta):
    """d(theta) for a covector; (d theta)(e_i, e_j) = -theta([e_i, e_j])."""
    theta = np.asarray(theta, dtype=float)
    m = np.einsum("k,kij->ij", theta, alg.c)
    return TwoForm(np.triu(m, 1))


def nilpotency_step(alg, tol=1e-10, max_iter=10):
    """Length s of the lower central series (C^{s+1} = 0)."""
    b = alg.bracket_tensor
    span = np.eye(alg.dim)  # columns span C^1 = h
    step = 0
    for step in range(1, max_iter + 1):
        # C^{step+1} = [h, C^{step}]
        gens = np.einsum("kiq,qm->kim", b, span, optimize=True).reshape(alg.dim, -1)
        u, s, _ = np.linalg.svd(gens)
        rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
        if rank == 0:
            return step
        if rank >= span.shape[1]:
            raise NotNilpotent("lower central series does not decrease")
        span = u[:, :rank]
    raise NotNilpotent("lower central series did not terminate")


def nijenhuis(alg, j, x, y, tol=DEFAULT_TOL):
    """N_J(X, Y) = [JX, JY] - J[JX, Y] - J[X, JY] - [X, Y]."""
    jm = j.matrix if isinstance(j, AlmostComplexStructure) else np.asarray(j, dtype=float)
    if max_norm(jm @ jm + np.eye(alg.dim)) > tol:
        raise ValueError("J^2 != -I within tolerance")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    jx, jy = jm @ x, jm @ y
    return (
        bracket(alg, jx, jy)
        - jm @ bracket(alg, jx, y)
        - jm @ bracket(alg, x, jy)
        - bracket(alg, x, y)
    )


def nijenhuis_tensor(alg, j):
    """N[k, i, j] = e^k-component of N_J(e_i, e_j); vanishes iff integrable."""
    jm = j.matrix if isinstance(j, AlmostComplexStructure) else np.asarray(j, dtype=float)
    b = alg.bracket_tensor
    jbj = np.einsum("kpq,pi,qj->kij", b, jm, jm, optimize=True)
    jb_left = np.einsum("km,mpj,pi->kij", jm, b, jm, optimize=True)
    jb_right = np.einsum("km,miq,qj->kij", jm, b, jm, optimize=True)
    return jbj - jb_left - jb_right - b


def nijenhuis_residual(alg, j, tol=DEFAULT_TOL):
    """Max over basis pairs of ||N_J(e_i, e_j)||_max; 0 iff J integrable."""
    jm = j.matrix if isinstance(j, AlmostComplexStructure) else np.asarray(j, dtype=float)
    if max_norm(jm @ jm + np.eye(alg.dim)) > tol:
        raise ValueError("J^2 != -I within tolerance")
    return max_norm(nijenhuis_tensor(alg, jm))


def is_abelian_structure(alg, j, tol=DEFAULT_TOL):
    """True iff [JX, JY] = [X, Y] on all basis pairs within tol."""
    jm = j.matrix if isinstance(j, AlmostComplexStructure) else np.asarray(j, dtype=float)
    if max_norm(jm @ jm + np.eye(alg.dim)) > tol:
        raise ValueError("J^2 != -I within tolerance")
    b = alg.bracket_tensor
    jbj = np.einsum("kpq,pi,qj->kij", b, jm, jm, optimize=True)
    return bool(max_norm(jbj - b) <= tol)


def standard_pairing_j():
    """Multiplication by sqrt(-1) for the pairing (e1,e2), (e3,e4), (e5,e6)."""
    j2 = np.array([[0.0, -1.0], [1.0, 0.0]])
    out = np.zeros((DIM, DIM))
    for k in range(3):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = j2
    return out


def lemma_j_h6():
    """The integrable J on h6 with Je1 = e4, Je2 = e3, Je5 = e6."""
    j = np.zeros((DIM, DIM))
    for src, dst in ((0, 3), (1, 2), (4, 5)):
        j[dst, src] = 1.0
        j[src, dst] = -1.0
    return AlmostComplexStructure(matrix=j, algebra="h6")


def algebra_from_json(text_or_dict):
    data = json.loads(text_or_dict) if isinstance(text_or_dict, str) else text_or_dict
    tokens = ",".join(data["d"])
    alg = parse_salamon(f"({tokens})")
    return replace(alg, label=data.get("label", "custom"))


def require_same_algebra(label_a, label_b):
    if label_a != label_b:
        raise AlgebraMismatch(f"algebra tags differ: {label_a!r} vs {label_b!r}")
