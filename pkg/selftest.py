"""selftest 子命令：整套验收检查，每项输出一行。"""
import logging
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from config.settings import settings
from eta_engine import (
    affine_permutation,
    check_multiplicativity,
    cycle_classes,
    delta,
    fin_cycle_census_check,
    inf_ranks,
    molien_alternating_check,
)
from exact_linalg import IntMatrix, inverse_unimodular
from ind_res import (
    FiniteGroup,
    catalog_group,
    catalog_names,
    double_coset_report,
    frobenius_check,
    norm_annihilation_check,
    permutation_action,
)
from k0_classes import K0Label, K0Vector
from limit_tower import (
    BetaAction,
    DegreeAction,
    GradedGroup,
    GroupPart,
    TelescopeSystem,
    full_k_theory,
    pv_step,
    stable_rank_oracle,
    subalgebra_k,
    telescope_colimit,
)
from number_field import Order, admissible_moduli, bundled_spec_names, open_field, smallest_admissible
from semidirect_group import enumerate_maximal_classes
from utils.audit_logger import AuditLogger
from utils.errors import KTheoryError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        mark = "✅" if self.passed else "❌"
        return f"{mark} {self.name}: {self.detail} ({self.seconds:.2f}s)"

    def to_json(self) -> Dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "seconds": round(self.seconds, 3)}


# ---- 高斯整数 c = 4 的独立枚举 ----

def _gauss_mul(x: Tuple[int, int], y: Tuple[int, int]) -> Tuple[int, int]:
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _i_power(k: int) -> Tuple[int, int]:
    return [(1, 0), (0, 1), (-1, 0), (0, -1)][k % 4]


def gaussian_brute_force_column(o: Order, chi: int, c: int = 4) -> Tuple[Dict[int, int], K0Vector]:
    """
    直接在 Z[i]/cZ[i] 上枚举 d ↦ -i·d 的圈，逐圈判定累积平移的共轭类。
    不使用引擎的规范化或嵌入例程，只用极大类列表识别标签。

    Returns:
        (圈长统计, η_c([p_χ((0, i))]) 的展开)
    """
    points = [(a, b) for a in range(c) for b in range(c)]
    index = {p: k for k, p in enumerate(points)}

    def step(p):
        q = _gauss_mul(_i_power(-1), p)
        return (q[0] % c, q[1] % c)

    seen = set()
    census: Dict[int, int] = {}
    coeffs: Dict[K0Label, int] = {}

    def add(label: K0Label, k: int):
        coeffs[label] = coeffs.get(label, 0) + k

    fin = {l.i: l for l in enumerate_maximal_classes(o) if not l.is_mu()}

    def add_character(label_of, order: int, t: int):
        t %= order
        if t == 0:
            add(K0Label.unit(), 1)
            for s in range(1, order):
                add(label_of(s), -1)
        else:
            add(label_of(t), 1)

    for start in points:
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        x = step(start)
        while x != start:
            cycle.append(x)
            seen.add(x)
            x = step(x)
        j = len(cycle)
        census[j] = census.get(j, 0) + 1
        d0 = min(cycle, key=lambda p: index[p])
        moved = _gauss_mul(_i_power(j), d0)
        b = ((moved[0] - d0[0]) // c, (moved[1] - d0[1]) // c)
        if j % 4 == 0:
            add(K0Label.unit(), 1)
        elif j == 1:
            # (b, i) 与 (0, i) 共轭 ⇔ b ∈ (1 - i) ⇔ 坐标和为偶数
            if (b[0] + b[1]) % 2 == 0:
                add_character(K0Label.mu, 4, chi)
            else:
                add_character(lambda s: K0Label.fin(fin[1], s), 4, chi)
        else:
            # (b, -1) 的类由 b mod 2 的 ζ-轨道决定：{0} ⊂ μ，{1+i} ⊂ (1, ·)，{1, i} 极大
            parity = (b[0] % 2, b[1] % 2)
            if parity in ((1, 0), (0, 1)):
                add_character(lambda s: K0Label.fin(fin[2], s), 2, chi)
            else:
                label_of = K0Label.mu if parity == (0, 0) else (lambda s: K0Label.fin(fin[1], s))
                for s in range(chi % 2, 4, 2):
                    add_character(label_of, 4, s)
    return dict(sorted(census.items())), K0Vector.from_dict(coeffs)


# ---- 各项检查 ----

def check_gaussian_pipeline() -> str:
    o = open_field("gaussian")
    if inf_ranks(o) != [1, 1] or delta(o) != 1:
        raise AssertionError(f"d = {inf_ranks(o)}, δ = {delta(o)}")
    if subalgebra_k(o, 4) != GradedGroup(GroupPart(q_rank=1, z_rank=4), GroupPart()):
        raise AssertionError("subalgebra_k ≠ (ℚ ⊕ ℤ⁴, 0)")
    for depth in range(4):
        result = full_k_theory(o, 4, depth)
        if result.first_pv != GradedGroup.free(4, 4):
            raise AssertionError(f"pv_step = {result.first_pv.describe()}")
        if result.formula != "ℤ^4 ⊗ Λ(Γ)" or result.tower != GradedGroup.free(4 * 2 ** depth, 4 * 2 ** depth):
            raise AssertionError(f"深度 {depth}: {result.formula} {result.tower.describe()}")
    return "ℤ^4 ⊗ Λ(Γ)，深度 0..3 的截断秩 4·2^j"


def check_real_places_split() -> str:
    expected = {"sqrt2": "ℤ^2 ⊗ Λ(Γ)", "cbrt2": "Λ(Γ)", "rationals": "Λ(Γ)"}
    for name, formula in expected.items():
        o = open_field(name)
        got = full_k_theory(o, smallest_admissible(o), 1).formula
        if got != formula:
            raise AssertionError(f"{name}: {got} ≠ {formula}")
    return ", ".join(f"{k} → {v}" for k, v in expected.items())


def check_cycle_census(max_points: int) -> str:
    total = 0
    for name in bundled_spec_names():
        o = open_field(name)
        for c in admissible_moduli(o, max_points):
            if not fin_cycle_census_check(o, c):
                raise AssertionError(f"{name}, c={c}")
            total += 1
    return f"{total} 个 (域, c) 组合"


def check_multiplicativity_sweep(max_points: int) -> str:
    total = 0
    for name in bundled_spec_names():
        o = open_field(name)
        moduli = admissible_moduli(o, max_points)
        for a in moduli:
            for b in moduli:
                if b < a or (a * b) ** o.n > max_points:
                    continue
                if not check_multiplicativity(o, a, b):
                    raise AssertionError(f"{name}: η_{a}·η_{b} ≠ η_{a * b}")
                total += 1
    return f"{total} 对"


def check_worked_column() -> str:
    o = open_field("gaussian")
    census = affine_permutation(o, 4, o.zero(), 1).census()
    if census != {1: 2, 2: 1, 4: 3}:
        raise AssertionError(f"圈长统计 {census}")
    for chi in range(4):
        brute_census, expected = gaussian_brute_force_column(o, chi)
        got = cycle_classes(o, 4, o.zero(), 1, chi)
        if brute_census != census or got != expected:
            raise AssertionError(f"χ{chi}: 引擎 {got}，枚举 {expected}")
    return "χ0..χ3 与独立枚举一致"


def check_colimit_oracle(rng: random.Random, samples: int = 200) -> str:
    for _ in range(samples):
        c = rng.randint(2, 9)
        exps = [rng.choice([0, 1, 2]) for _ in range(5)]
        rows = [[0] * 5 for _ in range(5)]
        for i in range(5):
            rows[i][i] = c ** exps[i]
            for j in range(i + 1, 5):
                rows[i][j] = rng.randint(-5, 5)
        system = TelescopeSystem(IntMatrix.from_rows(rows), c, tuple(exps))
        closed = (sum(1 for e in exps if e >= 1), sum(1 for e in exps if e == 0))
        if stable_rank_oracle(system) != closed:
            raise AssertionError(f"A = {rows}")
        colimit = telescope_colimit(system)
        if (colimit.even.q_rank, colimit.even.z_rank) != closed:
            raise AssertionError(f"A = {rows}")
    return f"{samples} 个随机 5x5 上三角矩阵"


def check_pv_identity(rng: random.Random) -> str:
    for a in range(11):
        for m in range(13):
            c = rng.randint(2, 12)
            q_diag = tuple(Fraction(1, c ** rng.randint(1, 4)) for _ in range(a))
            beta = BetaAction(DegreeAction(q_diag, IntMatrix.identity(m)), DegreeAction())
            k = GradedGroup(GroupPart(q_rank=a, z_rank=m), GroupPart())
            if pv_step(k, beta) != GradedGroup.free(m, m):
                raise AssertionError(f"a={a}, m={m}")
    return "a ≤ 10, m ≤ 12"


def check_double_cosets() -> str:
    groups = 0
    pairs = 0
    for name in catalog_names():
        group = catalog_group(name)
        if group.order > 12:
            continue
        results = double_coset_report(group)
        failed = [r for r in results if not r["passed"]]
        if failed:
            raise AssertionError(f"{name}: {len(failed)} 个子群对失败")
        whole = group.whole()
        if not all(frobenius_check(whole, h) for h in group.subgroups()):
            raise AssertionError(f"{name}: Frobenius 互反律失败")
        groups += 1
        pairs += len(results)
    return f"{groups} 个群，{pairs} 个子群对"


def _direct_sum(blocks: Sequence[Sequence[IntMatrix]], order: int) -> List[IntMatrix]:
    size = sum(b[0].rows for b in blocks)
    out = []
    for g in range(order):
        rows = [[0] * size for _ in range(size)]
        offset = 0
        for block in blocks:
            m = block[g]
            for i in range(m.rows):
                for j in range(m.cols):
                    rows[offset + i][offset + j] = m[i, j]
            offset += m.rows
        out.append(IntMatrix.from_rows(rows, size))
    return out


def _sign_action(group: FiniteGroup, kernel) -> List[IntMatrix]:
    return [IntMatrix.from_rows([[1 if g in kernel.elements else -1]]) for g in range(group.order)]


def random_representation(group: FiniteGroup, rng: random.Random, max_rank: int = 6) -> List[IntMatrix]:
    """若干置换表示与符号表示的直和，再用随机幺模矩阵共轭"""
    subs = group.subgroups()
    index_two = [h for h in subs if 2 * h.order == group.order]
    blocks = []
    rank = 0
    while True:
        choices = [permutation_action(group, h) for h in subs if group.order // h.order + rank <= max_rank]
        if index_two and rank + 1 <= max_rank:
            choices.append(_sign_action(group, rng.choice(index_two)))
        if not choices or (blocks and rng.random() < 0.4):
            break
        block = rng.choice(choices)
        blocks.append(block)
        rank += block[0].rows
    action = _direct_sum(blocks, group.order)
    r = action[0].rows
    u = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    for _ in range(3 * r):
        i, j = rng.sample(range(r), 2) if r > 1 else (0, 0)
        if i != j:
            k = rng.randint(-2, 2)
            u[i] = [x + k * y for x, y in zip(u[i], u[j])]
    u_mat = IntMatrix.from_rows(u, r)
    u_inv = inverse_unimodular(u_mat)
    return [u_mat @ m @ u_inv for m in action]


def check_norm_annihilation(rng: random.Random, samples: int = 100) -> str:
    names = ["C2", "C3", "C4", "S3"]
    for t in range(samples):
        group = catalog_group(names[t % len(names)])
        action = random_representation(group, rng)
        kernel_ok, cokernel_ok = norm_annihilation_check(group, action)
        if not (kernel_ok and cokernel_ok):
            raise AssertionError(f"{group.name}: 第 {t} 个表示")
    return f"{samples} 个随机整表示"


def check_molien() -> str:
    for name in bundled_spec_names():
        ok, lhs, rhs = molien_alternating_check(open_field(name))
        if not ok:
            raise AssertionError(f"{name}: {lhs} ≠ {rhs}")
    return f"{len(bundled_spec_names())} 个内置域"


def check_formula_paths() -> str:
    checked = []
    for name in bundled_spec_names():
        o = open_field(name)
        if o.m <= 2:
            continue
        result = full_k_theory(o, smallest_admissible(o), 2)
        first, second = result.branches[0], result.branches[1]
        if (first.formula, first.truncated) != (second.formula, second.truncated):
            raise AssertionError(f"{name}: {first.formula} ≠ {second.formula}")
        checked.append(name)
    return ", ".join(checked)


def acceptance_checks(max_points: Optional[int] = None, seed: int = 20240601) -> List[Tuple[str, Callable[[], str]]]:
    max_points = max_points or settings.SELFTEST_MAX_POINTS
    rng = random.Random(seed)
    return [
        ("gaussian_pipeline", check_gaussian_pipeline),
        ("real_places_split", check_real_places_split),
        ("cycle_census", lambda: check_cycle_census(max_points)),
        ("eta_multiplicativity", lambda: check_multiplicativity_sweep(max_points)),
        ("worked_column", check_worked_column),
        ("colimit_oracle", lambda: check_colimit_oracle(rng)),
        ("pv_identity", lambda: check_pv_identity(rng)),
        ("double_coset", check_double_cosets),
        ("norm_annihilation", lambda: check_norm_annihilation(rng)),
        ("molien", check_molien),
        ("formula_paths", check_formula_paths),
    ]


def run_selftest(max_points: Optional[int] = None, only: Optional[Sequence[str]] = None) -> List[CheckResult]:
    """逐项运行，单项失败不影响其余各项"""
    results = []
    for name, check in acceptance_checks(max_points):
        if only and name not in only:
            continue
        started = time.perf_counter()
        try:
            detail = check()
            passed = True
        except (AssertionError, KTheoryError) as exc:
            detail = f"{type(exc).__name__}: {exc}"
            passed = False
        result = CheckResult(name, passed, detail, time.perf_counter() - started)
        logger.info(result.line())
        AuditLogger.log_check_event("selftest", name, passed, {"detail": detail})
        results.append(result)
    return results
