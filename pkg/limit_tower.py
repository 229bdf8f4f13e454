"""归纳极限、Pimsner–Voiculescu 步骤与 Γ 塔。

可容许 c 组成按整除定向的共尾族，η_c 的归纳极限给出子代数的 K_0；
随后 c 生成的 Z-作用的 PV 序列给出 (ℤ^m, ℤ^m)，其余 Γ 生成元作用平凡，
每一步把两个次数的秩加倍，最终得到 ℤ^m ⊗ Λ(Γ)（或 n 为奇数时的 Λ(Γ)）。
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from exact_linalg import (
    IntMatrix,
    Lattice,
    cokernel,
    kernel_basis,
    lattice_membership,
    saturate,
    snf_diagonal,
    stable_rank,
)
from eta_engine import EtaMatrix, delta, eta_matrix, inf_ranks
from number_field import Order, is_admissible, real_places, smallest_admissible
from semidirect_group import enumerate_maximal_classes
from utils.audit_logger import AuditLogger
from utils.errors import (
    CertificateMismatch,
    InvariantViolation,
    NotAdmissible,
    ShapeMismatch,
    UncertifiedIntegralRequest,
)

logger = logging.getLogger(__name__)


def _superscript(k: int) -> str:
    return "" if k == 1 else f"^{k}"


def normalize_torsion(values: Sequence[int]) -> Tuple[int, ...]:
    """把任意有限循环群列表规范为不变因子（每个 > 1，依次整除）"""
    values = [abs(v) for v in values if abs(v) > 1]
    if not values:
        return ()
    return tuple(d for d in snf_diagonal(IntMatrix.diagonal(values)) if d > 1)


@dataclass(frozen=True)
class GroupPart:
    """ℚ^q ⊕ ℤ^z ⊕ 挠部分"""

    q_rank: int = 0
    z_rank: int = 0
    torsion: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.q_rank < 0 or self.z_rank < 0:
            raise InvariantViolation("秩不能为负")
        object.__setattr__(self, "torsion", normalize_torsion(self.torsion))

    @property
    def rank(self) -> int:
        return self.q_rank + self.z_rank

    def __add__(self, other: "GroupPart") -> "GroupPart":
        return GroupPart(self.q_rank + other.q_rank, self.z_rank + other.z_rank, self.torsion + other.torsion)

    def describe(self) -> str:
        parts = []
        if self.q_rank:
            parts.append("ℚ" + _superscript(self.q_rank))
        if self.z_rank:
            parts.append("ℤ" + _superscript(self.z_rank))
        parts.extend(f"ℤ/{d}" for d in self.torsion)
        return " ⊕ ".join(parts) if parts else "0"

    def to_json(self) -> Dict:
        return {"q_rank": self.q_rank, "z_rank": self.z_rank, "torsion": [str(d) for d in self.torsion]}


@dataclass(frozen=True)
class GradedGroup:
    even: GroupPart = field(default_factory=GroupPart)
    odd: GroupPart = field(default_factory=GroupPart)

    def describe(self) -> str:
        return f"({self.even.describe()}, {self.odd.describe()})"

    def to_json(self) -> Dict:
        return {"K0": self.even.to_json(), "K1": self.odd.to_json(), "text": self.describe()}

    @classmethod
    def free(cls, even: int, odd: int) -> "GradedGroup":
        return cls(GroupPart(z_rank=even), GroupPart(z_rank=odd))


# ---- 归纳极限 ----

@dataclass(frozen=True)
class TelescopeSystem:
    """
    ℤ^r → ℤ^r → … 沿 A 的归纳系统；A 在具体参数 c 处取值。
    certificate 为对角证书：第 i 个方向对角元为 c^e（e 为整数）或幂零（None）。
    """

    matrix: IntMatrix
    c: int
    certificate: Optional[Tuple[Optional[int], ...]] = None
    unknown_entries: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if not self.matrix.is_square:
            raise ShapeMismatch("归纳系统的矩阵必须是方阵")
        if self.certificate is not None:
            self.check_certificate()

    def check_certificate(self):
        a = self.matrix
        cert = self.certificate
        if len(cert) != a.rows:
            raise CertificateMismatch("证书长度与矩阵维数不符")
        for i in range(a.rows):
            for j in range(i):
                if a[i, j] != 0:
                    raise CertificateMismatch(f"证书要求上三角，但 A[{i},{j}] ≠ 0")
            expected = 0 if cert[i] is None else self.c ** cert[i]
            if a[i, i] != expected:
                raise CertificateMismatch(f"对角元 A[{i},{i}] = {a[i, i]}，证书给出 {expected}")

    @classmethod
    def with_inferred_certificate(cls, matrix: IntMatrix, c: int) -> "TelescopeSystem":
        """上三角且对角元均为 0 或 c 的幂时自动生成证书，否则不带证书"""
        if not matrix.is_square or c < 2:
            return cls(matrix, c)
        if any(matrix[i, j] for i in range(matrix.rows) for j in range(i)):
            return cls(matrix, c)
        cert: List[Optional[int]] = []
        for i in range(matrix.rows):
            v = matrix[i, i]
            if v == 0:
                cert.append(None)
                continue
            e, x = 0, v
            while x % c == 0 and x > 1:
                x //= c
                e += 1
            if x != 1:
                return cls(matrix, c)
            cert.append(e)
        return cls(matrix, c, tuple(cert))


def stable_rank_oracle(sys: TelescopeSystem) -> Tuple[int, int]:
    """
    秩一致性对照：(ℚ 维数, ℤ 维数)，直接由矩阵算出，不读取证书。

    有理秩取稳定秩 rank(A^r)；ℤ 部分取广义 1-特征空间的饱和格 L 的维数，
    并确认 A 限制在 L 上是格自同构（行列式 ±1），这一部分的极限因此是 ℤ^{rank L}。
    三角情形下结果应与证书计数一致。
    """
    a = sys.matrix
    r = a.rows
    if r == 0:
        return 0, 0
    total = stable_rank(a)
    generalized = (a - IntMatrix.identity(r)).power(r)
    ker = kernel_basis(generalized)
    if not ker.cols:
        return total, 0
    fixed = saturate(Lattice.span(ker))
    cols = []
    for v in fixed.vectors():
        coords = lattice_membership(a.apply(v), fixed)
        if coords is None:
            raise InvariantViolation("A 不保持广义 1-特征格")
        cols.append(coords)
    if abs(IntMatrix.from_columns(cols, fixed.rank).det()) != 1:
        raise InvariantViolation("A 在广义 1-特征格上的限制不可逆")
    return total - fixed.rank, fixed.rank


def telescope_colimit(sys: TelescopeSystem, invert_all_primes: bool = True) -> GradedGroup:
    """
    沿 A 的归纳极限（只有 0 次部分）

    Args:
        sys: 归纳系统
        invert_all_primes: True 时 c 取遍全部可容许值（每个素数最终都被逆），要求证书；
            False 时只给出有理化答案 ℚ^{稳定秩}

    Returns:
        GradedGroup
    """
    if not invert_all_primes:
        return GradedGroup(GroupPart(q_rank=stable_rank(sys.matrix)), GroupPart())
    if sys.certificate is None:
        raise UncertifiedIntegralRequest("没有对角证书，无法给出 ℤ-结构")

    q = sum(1 for e in sys.certificate if e is not None and e >= 1)
    z = sum(1 for e in sys.certificate if e == 0)
    oracle = stable_rank_oracle(sys)
    if oracle != (q, z):
        raise InvariantViolation(f"闭式 (ℚ^{q}, ℤ^{z}) 与稳定秩对照 {oracle} 不一致")
    return GradedGroup(GroupPart(q_rank=q, z_rank=z), GroupPart())


def eta_telescope(eta: EtaMatrix) -> TelescopeSystem:
    """EtaMatrix 在全基上的带证书归纳系统；Inf 行的有限列记为未知元"""
    full = eta.full_matrix()
    n_inf = len(eta.inf_labels())
    unknown = tuple(
        (1 + t, col)
        for t in range(n_inf)
        for col in [0] + list(range(1 + n_inf, full.cols))
    )
    return TelescopeSystem(full, eta.c, tuple(eta.diagonal_exponents()), unknown)


def _check_admissible(o: Order, c: int):
    if not is_admissible(o, c):
        raise NotAdmissible(f"{o.name}: c={c} 不可容许")


def subalgebra_k(o: Order, c: int) -> GradedGroup:
    """ℚ^{Σ d_k - δ} ⊕ ℤ^δ ⊕ ℤ^{m-1}，并与 η_c 的归纳极限交叉检查"""
    _check_admissible(o, c)
    d = delta(o)
    closed = GradedGroup(GroupPart(q_rank=sum(inf_ranks(o)) - d, z_rank=d + o.m - 1), GroupPart())
    colimit = telescope_colimit(eta_telescope(eta_matrix(o, c)), invert_all_primes=True)
    if colimit != closed:
        raise InvariantViolation(f"{o.name}: 闭式 {closed.describe()} 与归纳极限 {colimit.describe()} 不符")
    AuditLogger.log_limit_event("subalgebra_k", o.name, {"c": c, "result": closed.describe()})
    return closed


def finite_adelic_k(o: Order, c: Optional[int] = None) -> Dict[str, GradedGroup]:
    """有限阿代尔侧的两个交叉积与子代数有同样的 K 理论"""
    k = subalgebra_k(o, c if c is not None else smallest_admissible(o))
    return {
        "K_*(C(R̄) ⋊ R ⋊ μ)": k,
        "K_*(C_0(𝔸_∞) ⋊ K ⋊ μ)": k,
    }


# ---- Pimsner–Voiculescu ----

@dataclass(frozen=True)
class DegreeAction:
    """一个次数上的作用：ℚ 块对角元与 ℤ 块矩阵；挠部分上恒等"""

    q_diagonal: Tuple[Fraction, ...] = ()
    z_matrix: IntMatrix = field(default_factory=lambda: IntMatrix.identity(0))


@dataclass(frozen=True)
class BetaAction:
    even: DegreeAction = field(default_factory=DegreeAction)
    odd: DegreeAction = field(default_factory=DegreeAction)

    @classmethod
    def identity_on(cls, k: GradedGroup) -> "BetaAction":
        def ident(part: GroupPart) -> DegreeAction:
            return DegreeAction((Fraction(1),) * part.q_rank, IntMatrix.identity(part.z_rank))
        return cls(ident(k.even), ident(k.odd))


def ad_action(eta: EtaMatrix) -> BetaAction:
    """Ad(s_c) 在极限上的作用：ℚ 方向为 c^{-e}，ℤ^{δ+m-1} 上为恒等"""
    exps = eta.diagonal_exponents()
    q_diag = tuple(Fraction(1, eta.c ** e) for e in exps if e is not None and e >= 1)
    z_rank = sum(1 for e in exps if e == 0)
    return BetaAction(DegreeAction(q_diag, IntMatrix.identity(z_rank)), DegreeAction())


def _ker_coker(part: GroupPart, action: DegreeAction) -> Tuple[GroupPart, GroupPart]:
    if len(action.q_diagonal) != part.q_rank:
        raise ShapeMismatch(f"ℚ 块大小 {len(action.q_diagonal)} 与秩 {part.q_rank} 不符")
    if action.z_matrix.rows != part.z_rank or not action.z_matrix.is_square:
        raise ShapeMismatch(f"ℤ 块 {action.z_matrix.rows}x{action.z_matrix.cols} 与秩 {part.z_rank} 不符")
    fixed_q = sum(1 for x in action.q_diagonal if x == 1)
    ker_z, coker_free, coker_torsion = 0, 0, ()
    if part.z_rank:
        m = IntMatrix.identity(part.z_rank) - action.z_matrix
        ker_z = kernel_basis(m).cols
        coker = cokernel(m)
        coker_free, coker_torsion = coker.free_rank, tuple(coker.torsion)
    ker = GroupPart(fixed_q, ker_z, part.torsion)
    cok = GroupPart(fixed_q, coker_free, coker_torsion + part.torsion)
    return ker, cok


def pv_step(k: GradedGroup, beta: BetaAction) -> GradedGroup:
    """
    PV 六项序列：K_0' = coker(1-β)_0 ⊕ ker(1-β)_1，K_1' = ker(1-β)_0 ⊕ coker(1-β)_1
    """
    ker0, coker0 = _ker_coker(k.even, beta.even)
    ker1, coker1 = _ker_coker(k.odd, beta.odd)
    result = GradedGroup(coker0 + ker1, ker0 + coker1)
    if result.even.rank != result.odd.rank:
        raise InvariantViolation(f"PV 输出的欧拉示性数非零: {result.describe()}")
    return result


def gamma_tower(k0: GradedGroup, j: int) -> GradedGroup:
    """对 k0 施加 j 次恒等作用的 PV 步骤"""
    if j < 0:
        raise ShapeMismatch("截断深度必须非负")
    k = k0
    for _ in range(j):
        k = pv_step(k, BetaAction.identity_on(k))
    return k


def exterior_ranks(base_rank: int, gamma_rank: int) -> Dict:
    """ℤ^b ⊗ Λ(ℤ^g) 的分次秩与 Λ^t 分解"""
    terms = [{"t": t, "rank": base_rank * comb(gamma_rank, t)} for t in range(gamma_rank + 1)]
    return {
        "even": sum(x["rank"] for x in terms if x["t"] % 2 == 0),
        "odd": sum(x["rank"] for x in terms if x["t"] % 2 == 1),
        "terms": terms,
    }


KIRCHBERG_PHILLIPS_NOTE = (
    "所有数域整数环的环 C*-代数都是 UCT 类中的 Kirchberg 代数，且 K 理论同构，"
    "因此由 Kirchberg–Phillips 分类定理它们彼此同构。"
)
PRIOR_WORK_NOTE = "m = 2（只含 ±1）的情形与已有结果一致：K_*(𝔄[R]) ≅ ℤ² ⊗ Λ(Γ)（偶数个实位）或 Λ(Γ)。"


def _formula(base: int) -> str:
    return "Λ(Γ)" if base == 1 else f"ℤ^{base} ⊗ Λ(Γ)"


@dataclass(frozen=True)
class FormulaBranch:
    name: str
    formula: str
    truncated: GradedGroup

    def to_json(self) -> Dict:
        return {"name": self.name, "formula": self.formula, "truncated": self.truncated.to_json()}


@dataclass(frozen=True)
class KTheoryResult:
    """full_k_theory 的全部中间结果"""

    target: str
    c: int
    depth: int
    inf_ranks: Tuple[int, ...]
    delta: int
    maximal_classes: Tuple[str, ...]
    eta: EtaMatrix
    subalgebra: GradedGroup
    first_pv: GradedGroup
    tower: GradedGroup
    formula: str
    branches: Tuple[FormulaBranch, ...]
    exterior: Dict
    notes: Tuple[str, ...]

    def to_json(self) -> Dict:
        return {
            "target": self.target,
            "c": self.c,
            "truncate": self.depth,
            "inf_ranks": list(self.inf_ranks),
            "delta": self.delta,
            "maximal_classes": list(self.maximal_classes),
            "eta": self.eta.to_json(),
            "subalgebra_k": self.subalgebra.to_json(),
            "pv_step": self.first_pv.to_json(),
            "gamma_tower": self.tower.to_json(),
            "formula": self.formula,
            "branches": [b.to_json() for b in self.branches],
            "exterior": self.exterior,
            "notes": list(self.notes),
        }


def real_places_branch(o: Order, depth: int) -> FormulaBranch:
    """按实位个数的奇偶性给出答案"""
    places = real_places(o.poly)
    base = o.m if places % 2 == 0 else 1
    case = "even" if places % 2 == 0 else "odd"
    return FormulaBranch(f"real-places-{case}", _formula(base), GradedGroup.free(base * 2 ** depth, base * 2 ** depth))


def mu_branch(o: Order, depth: int) -> FormulaBranch:
    """含高次单位根时：K_0(C*(μ)) ⊗ Λ(Γ)，K_0(C*(μ)) = ℤ^m"""
    return FormulaBranch("mu", _formula(o.m), GradedGroup.free(o.m * 2 ** depth, o.m * 2 ** depth))


def full_k_theory(o: Order, c: int, depth: int) -> KTheoryResult:
    """
    环 C*-代数 𝔄[R] 的 K 理论

    Args:
        o: 整数环
        c: 可容许模数
        depth: Γ 的截断深度 j（Γ_j = ⟨c, c_1, …, c_j⟩）

    Returns:
        KTheoryResult
    """
    _check_admissible(o, c)
    eta = eta_matrix(o, c)
    sub = subalgebra_k(o, c)
    first = pv_step(sub, ad_action(eta))
    d = delta(o)
    base = d + o.m - 1
    if first != GradedGroup.free(base, base):
        raise InvariantViolation(f"第一次 PV 步骤得到 {first.describe()}，应为 (ℤ^{base}, ℤ^{base})")
    tower = gamma_tower(first, depth)

    by_places = real_places_branch(o, depth)
    branches = [by_places]
    if tower != by_places.truncated:
        raise InvariantViolation(f"流水线 {tower.describe()} 与实位判别 {by_places.truncated.describe()} 不符")
    if o.m > 2:
        by_mu = mu_branch(o, depth)
        if by_mu.formula != by_places.formula or by_mu.truncated != by_places.truncated:
            raise InvariantViolation("μ 分支与实位分支的结论不一致")
        branches.insert(0, by_mu)

    notes = [KIRCHBERG_PHILLIPS_NOTE]
    if o.m == 2:
        notes.append(PRIOR_WORK_NOTE)
    result = KTheoryResult(
        target="ring-cstar",
        c=c,
        depth=depth,
        inf_ranks=tuple(inf_ranks(o)),
        delta=d,
        maximal_classes=tuple(str(l) for l in enumerate_maximal_classes(o)),
        eta=eta,
        subalgebra=sub,
        first_pv=first,
        tower=tower,
        formula=by_places.formula,
        branches=tuple(branches),
        exterior=exterior_ranks(base, depth + 1),
        notes=tuple(notes),
    )
    logger.info(f"✅ {o.name}: K_*(𝔄[R]) ≅ {result.formula}")
    AuditLogger.log_limit_event("full_k_theory", o.name, {"c": c, "depth": depth, "formula": result.formula})
    return result


def group_algebra_k(o: Order, depth: int = 0) -> Dict:
    """K_*(C*(K ⋊ K^×)) ≅ ℤ^m ⊗ Λ(Γ)，对任意数域成立"""
    truncated = GradedGroup.free(o.m * 2 ** depth, o.m * 2 ** depth)
    return {
        "target": "group-cstar",
        "label": "K_*(C*(K ⋊ K^×))",
        "formula": f"ℤ^{o.m} ⊗ Λ(Γ)",
        "truncate": depth,
        "truncated": truncated.to_json(),
        "exterior": exterior_ranks(o.m, depth + 1),
        "notes": [KIRCHBERG_PHILLIPS_NOTE],
    }
