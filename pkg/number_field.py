"""数域整数环 R 的算术。

R 由用户给出的整基 ω_1 = 1, ω_2, …, ω_n 描述（以定义多项式 f 的根 θ 的幂基表示），
元素以 ω-坐标的整数元组保存。本模块校验整基的乘法封闭性、ζ 的阶与作用的自由性，
并提供商环 R/cR（坐标盒代表系）、一般主理想商 R/aR（经由 SNF）、可容许模数判定
以及单位根群极大性的概率检验。
"""
import json
import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from math import lcm, prod
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from sympy import Matrix, Poly, Rational, primerange, sturm, symbols, totient

from config.settings import settings
from exact_linalg import IntMatrix, Lattice, inverse_unimodular, lattice_membership, snf
from utils.audit_logger import AuditLogger
from utils.errors import (
    BasisNotClosed,
    ComputationError,
    InvariantViolation,
    NotMonic,
    NotSquarefree,
    SpecFormatError,
    TooManyPoints,
    ZeroModulus,
    ZetaActionNotFree,
    ZetaNotIntegral,
    ZetaOrderWrong,
)

logger = logging.getLogger(__name__)

X = symbols("x")

Coords = Tuple[int, ...]


# ---- 规格文件 ----

def parse_rational(value) -> Fraction:
    """解析 "p/q" 形式的有理数字符串（也接受整数）"""
    if isinstance(value, bool):
        raise SpecFormatError(f"无法解析有理数: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                p, q = text.split("/", 1)
                return Fraction(int(p), int(q))
            return Fraction(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecFormatError(f"无法解析有理数: {value!r}") from exc
    raise SpecFormatError(f"无法解析有理数: {value!r}")


def format_rational(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class FieldSpec:
    """域规格：定义多项式、整基、ζ 及其声明的阶 m"""

    name: str
    degree: int
    poly: Tuple[int, ...]
    integral_basis: Tuple[Tuple[Fraction, ...], ...]
    zeta: Tuple[Fraction, ...]
    m: int

    @classmethod
    def from_mapping(cls, data: Dict) -> "FieldSpec":
        missing = [k for k in ("name", "degree", "poly", "integral_basis", "zeta", "m") if k not in data]
        if missing:
            raise SpecFormatError(f"规格缺少字段: {', '.join(missing)}")
        try:
            degree = int(data["degree"])
            m = int(data["m"])
            poly = tuple(int(c) for c in data["poly"])
        except (TypeError, ValueError) as exc:
            raise SpecFormatError(f"规格字段格式错误: {exc}") from exc
        basis = tuple(tuple(parse_rational(x) for x in row) for row in data["integral_basis"])
        zeta = tuple(parse_rational(x) for x in data["zeta"])
        if degree < 1:
            raise SpecFormatError("degree 必须为正整数")
        if m < 1:
            raise SpecFormatError("m 必须为正整数")
        if len(poly) != degree + 1:
            raise SpecFormatError(f"poly 应有 {degree + 1} 个系数（升幂），实际 {len(poly)} 个")
        if len(basis) != degree or any(len(row) != degree for row in basis):
            raise SpecFormatError(f"integral_basis 必须是 {degree}x{degree} 矩阵")
        if len(zeta) != degree:
            raise SpecFormatError(f"zeta 必须有 {degree} 个坐标")
        return cls(str(data["name"]), degree, poly, basis, zeta, m)

    def to_mapping(self) -> Dict:
        return {
            "name": self.name,
            "degree": self.degree,
            "poly": list(self.poly),
            "integral_basis": [[format_rational(x) for x in row] for row in self.integral_basis],
            "zeta": [format_rational(x) for x in self.zeta],
            "m": self.m,
        }


def load_field_spec(path: str) -> FieldSpec:
    """读取 TOML 或 JSON 规格文件"""
    try:
        if path.endswith(".json"):
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        else:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
    except (OSError, json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise SpecFormatError(f"无法读取规格文件 {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise SpecFormatError(f"规格文件 {path} 顶层必须是表")
    return FieldSpec.from_mapping(data)


def resolve_spec(name_or_path: str) -> FieldSpec:
    """接受文件路径或内置规格名（如 gaussian）"""
    if os.path.exists(name_or_path):
        return load_field_spec(name_or_path)
    stem = os.path.splitext(os.path.basename(name_or_path))[0]
    candidate = settings.spec_path(stem)
    if os.path.exists(candidate):
        return load_field_spec(candidate)
    raise SpecFormatError(f"找不到规格文件: {name_or_path}")


def bundled_spec_names() -> List[str]:
    if not os.path.isdir(settings.SPEC_DIR):
        return []
    return sorted(os.path.splitext(f)[0] for f in os.listdir(settings.SPEC_DIR) if f.endswith(".toml"))


# ---- 环的元素 ----

@dataclass(frozen=True)
class OrderElement:
    """R 中元素，坐标相对于整基"""

    coords: Coords

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    def __add__(self, other: "OrderElement") -> "OrderElement":
        return OrderElement(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "OrderElement") -> "OrderElement":
        return OrderElement(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "OrderElement":
        return OrderElement(tuple(-a for a in self.coords))

    def scale(self, k: int) -> "OrderElement":
        return OrderElement(tuple(k * a for a in self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def to_json(self) -> List[str]:
        return [str(a) for a in self.coords]


def _poly_from_power_coords(coords: Sequence) -> Poly:
    return Poly([Rational(c.numerator, c.denominator) for c in reversed(coords)], X, domain="QQ")


def _poly_to_power_coords(p: Poly, n: int) -> List[Fraction]:
    coeffs = list(reversed(p.all_coeffs()))
    coeffs += [0] * (n - len(coeffs))
    return [Fraction(int(c.p), int(c.q)) for c in (Rational(v) for v in coeffs[:n])]


@dataclass(frozen=True)
class Order:
    """R 的乘法结构：结构常数 c_ijk 与乘 ζ 矩阵 Z"""

    name: str
    n: int
    m: int
    poly: Tuple[int, ...]
    structure: Tuple[Tuple[Coords, ...], ...]
    zeta_coords: Coords
    zeta_matrix: IntMatrix
    basis_matrix: Tuple[Tuple[Fraction, ...], ...] = field(compare=False, repr=False)

    # ---- 元素构造 ----

    def element(self, coords: Sequence[int]) -> OrderElement:
        if len(coords) != self.n:
            raise ComputationError(f"元素需要 {self.n} 个坐标，实际 {len(coords)} 个")
        return OrderElement(tuple(coords))

    def zero(self) -> OrderElement:
        return OrderElement((0,) * self.n)

    def one(self) -> OrderElement:
        return OrderElement((1,) + (0,) * (self.n - 1))

    def integer(self, k: int) -> OrderElement:
        return self.one().scale(k)

    @property
    def zeta(self) -> OrderElement:
        return OrderElement(self.zeta_coords)

    # ---- 算术 ----

    def mul(self, a: OrderElement, b: OrderElement) -> OrderElement:
        out = [0] * self.n
        for i, ai in enumerate(a.coords):
            if not ai:
                continue
            for j, bj in enumerate(b.coords):
                if not bj:
                    continue
                w = ai * bj
                for k, c in enumerate(self.structure[i][j]):
                    if c:
                        out[k] += w * c
        return OrderElement(tuple(out))

    def power(self, a: OrderElement, k: int) -> OrderElement:
        result = self.one()
        for _ in range(k):
            result = self.mul(result, a)
        return result

    def mult_matrix(self, a: OrderElement) -> IntMatrix:
        """乘 a 的矩阵，第 j 列是 a·ω_j 的坐标"""
        cols = []
        for j in range(self.n):
            basis_j = OrderElement(tuple(1 if k == j else 0 for k in range(self.n)))
            cols.append(self.mul(a, basis_j).coords)
        return IntMatrix.from_columns(cols, self.n)

    def norm(self, a: OrderElement) -> int:
        return self.mult_matrix(a).det()

    @cached_property
    def zeta_powers(self) -> Tuple[IntMatrix, ...]:
        powers = [IntMatrix.identity(self.n)]
        for _ in range(1, self.m):
            powers.append(self.zeta_matrix @ powers[-1])
        return tuple(powers)

    def zeta_power(self, i: int) -> IntMatrix:
        return self.zeta_powers[i % self.m]

    def rotate(self, x: OrderElement, i: int) -> OrderElement:
        """ζ^i · x"""
        return OrderElement(self.zeta_power(i).apply(x.coords))

    def one_minus_zeta_power(self, i: int) -> IntMatrix:
        """矩阵 1 - Z^i"""
        return IntMatrix.identity(self.n) - self.zeta_power(i)

    def to_power_basis(self, x: OrderElement) -> Tuple[Fraction, ...]:
        return tuple(
            sum((x.coords[j] * self.basis_matrix[j][k] for j in range(self.n)), Fraction(0))
            for k in range(self.n)
        )

    def discriminant(self) -> int:
        """整基的判别式 disc(f)·det(B)^2"""
        f = Poly(list(reversed(self.poly)), X)
        det_b = Matrix([[Rational(v.numerator, v.denominator) for v in row] for row in self.basis_matrix]).det()
        value = f.discriminant() * det_b ** 2
        return int(value)

    def basis_denominator(self) -> int:
        return lcm(*(v.denominator for row in self.basis_matrix for v in row))

    def describe_element(self, x: OrderElement) -> str:
        return "(" + ", ".join(str(c) for c in x.coords) + ")"


def load_field(spec: FieldSpec) -> Order:
    """
    校验规格并构造 Order

    Args:
        spec: 域规格

    Returns:
        Order: 乘法结构已校验的整数环

    Raises:
        NotMonic, NotSquarefree, BasisNotClosed, ZetaNotIntegral,
        ZetaOrderWrong, ZetaActionNotFree, SpecFormatError
    """
    n = spec.degree
    if spec.poly[-1] != 1:
        raise NotMonic(f"{spec.name}: 定义多项式首项系数为 {spec.poly[-1]}")
    f = Poly(list(reversed(spec.poly)), X)
    if f.discriminant() == 0:
        raise NotSquarefree(f"{spec.name}: 定义多项式有重根")

    basis = spec.integral_basis
    if basis[0] != (Fraction(1),) + (Fraction(0),) * (n - 1):
        raise SpecFormatError(f"{spec.name}: 第一个整基元素必须是 1")
    b_matrix = Matrix([[Rational(v.numerator, v.denominator) for v in row] for row in basis])
    if b_matrix.det() == 0:
        raise SpecFormatError(f"{spec.name}: 整基矩阵奇异")
    b_inv = b_matrix.inv()

    def to_basis_coords(power_coords: Sequence[Fraction]) -> List[Fraction]:
        row = Matrix([[Rational(v.numerator, v.denominator) for v in power_coords]])
        out = row * b_inv
        return [Fraction(int(Rational(v).p), int(Rational(v).q)) for v in out]

    def integral(values: Sequence[Fraction]) -> Optional[Coords]:
        if any(v.denominator != 1 for v in values):
            return None
        return tuple(int(v) for v in values)

    omegas = [_poly_from_power_coords(row) for row in basis]
    f_qq = Poly(list(reversed(spec.poly)), X, domain="QQ")
    structure = []
    for i in range(n):
        row = []
        for j in range(n):
            prod_poly = (omegas[i] * omegas[j]).rem(f_qq)
            coords = integral(to_basis_coords(_poly_to_power_coords(prod_poly, n)))
            if coords is None:
                raise BasisNotClosed(f"{spec.name}: ω_{i + 1}·ω_{j + 1} 不在整基张成的环中")
            row.append(coords)
        structure.append(tuple(row))
    structure = tuple(structure)

    zeta = integral(to_basis_coords(spec.zeta))
    if zeta is None:
        raise ZetaNotIntegral(f"{spec.name}: ζ 的整基坐标不是整数")

    proto = Order(spec.name, n, spec.m, spec.poly, structure, zeta, IntMatrix.identity(n), basis)
    check_structure_constants(proto)
    zeta_matrix = proto.mult_matrix(OrderElement(zeta))
    order = Order(spec.name, n, spec.m, spec.poly, structure, zeta, zeta_matrix, basis)

    identity = IntMatrix.identity(n)
    if not zeta_matrix.power(spec.m).is_identity():
        raise ZetaOrderWrong(f"{spec.name}: ζ^{spec.m} ≠ 1")
    for k in range(1, spec.m):
        if spec.m % k == 0 and zeta_matrix.power(k) == identity:
            raise ZetaOrderWrong(f"{spec.name}: ζ 的阶是 {k}，不是声明的 {spec.m}")
    for i in range(1, spec.m):
        if order.one_minus_zeta_power(i).det() == 0:
            raise ZetaActionNotFree(f"{spec.name}: 1 - Z^{i} 奇异")

    logger.info(f"✅ 数域 {spec.name} 载入成功: n={n}, m={spec.m}")
    AuditLogger.log_field_event("loaded", spec.name, {"n": n, "m": spec.m, "poly": list(spec.poly)})
    return order


@lru_cache(maxsize=None)
def open_field(name_or_path: str) -> Order:
    """按名字或路径载入并缓存整数环"""
    return load_field(resolve_spec(name_or_path))


def check_structure_constants(o: Order):
    """在所有基元素三元组上检查交换律与结合律"""
    basis = [OrderElement(tuple(1 if k == j else 0 for k in range(o.n))) for j in range(o.n)]
    for a in basis:
        for b in basis:
            if o.mul(a, b) != o.mul(b, a):
                raise SpecFormatError(f"{o.name}: 结构常数不交换")
            for c in basis:
                if o.mul(o.mul(a, b), c) != o.mul(a, o.mul(b, c)):
                    raise SpecFormatError(f"{o.name}: 结构常数不结合")


# ---- 商环 ----

@dataclass(frozen=True)
class QuotientRing:
    """R/cR，代表系为坐标盒 [0, c)^n；下标按字典序编号"""

    order: Order
    c: int

    def __post_init__(self):
        if self.c < 2:
            raise ComputationError("模数 c 必须大于 1")

    @property
    def size(self) -> int:
        return self.c ** self.order.n

    def reduce(self, x: OrderElement) -> OrderElement:
        return OrderElement(tuple(a % self.c for a in x.coords))

    def index(self, x: OrderElement) -> int:
        idx = 0
        for a in x.coords:
            idx = idx * self.c + (a % self.c)
        return idx

    def element(self, idx: int) -> OrderElement:
        coords = []
        for _ in range(self.order.n):
            idx, r = divmod(idx, self.c)
            coords.append(r)
        return OrderElement(tuple(reversed(coords)))

    def reps(self) -> Iterator[OrderElement]:
        for coords in product(range(self.c), repeat=self.order.n):
            yield OrderElement(coords)

    def check_size(self):
        if self.size > settings.MAX_QUOTIENT_POINTS:
            raise TooManyPoints(
                f"R/{self.c}R 有 {self.size} 个元素，超过上限 {settings.MAX_QUOTIENT_POINTS}"
            )


def quotient(o: Order, c: int) -> QuotientRing:
    return QuotientRing(o, c)


@dataclass(frozen=True)
class IdealQuotient:
    """R/aR，经由 a 的乘法矩阵的 SNF；类由 SNF 坐标的约化值表示"""

    order: Order
    generator: OrderElement
    moduli: Tuple[int, ...] = field(init=False)
    left: IntMatrix = field(init=False, repr=False)
    left_inverse: IntMatrix = field(init=False, repr=False)

    def __post_init__(self):
        if self.generator.is_zero():
            raise ZeroModulus("理想生成元不能为零")
        d, u, _ = snf(self.order.mult_matrix(self.generator))
        object.__setattr__(self, "moduli", tuple(d[i, i] for i in range(self.order.n)))
        object.__setattr__(self, "left", u)
        object.__setattr__(self, "left_inverse", inverse_unimodular(u))

    @property
    def size(self) -> int:
        return prod(self.moduli)

    def reduce(self, x: OrderElement) -> Tuple[int, ...]:
        y = self.left.apply(x.coords)
        return tuple(v % d for v, d in zip(y, self.moduli))

    def lift(self, key: Sequence[int]) -> OrderElement:
        return OrderElement(self.left_inverse.apply(tuple(key)))

    def contains(self, x: OrderElement) -> bool:
        return not any(self.reduce(x))

    def keys(self) -> Iterator[Tuple[int, ...]]:
        return product(*(range(d) for d in self.moduli))

    def elements(self) -> Iterator[OrderElement]:
        for key in self.keys():
            yield self.lift(key)


def ideal_lattice(o: Order, a: OrderElement) -> Lattice:
    if a.is_zero():
        raise ZeroModulus("理想生成元不能为零")
    return Lattice(o.n, o.mult_matrix(a))


def ideal_membership(o: Order, x: OrderElement, a: OrderElement) -> bool:
    """x ∈ aR"""
    return lattice_membership(x.coords, ideal_lattice(o, a)) is not None


def exact_quotient(o: Order, x: OrderElement, a: OrderElement) -> Optional[OrderElement]:
    """若 x ∈ aR 返回 x/a，否则 None"""
    coeffs = lattice_membership(x.coords, ideal_lattice(o, a))
    return None if coeffs is None else OrderElement(coeffs)


# ---- 实位与可容许性 ----

def real_places(f) -> int:
    """用 Sturm 序列计算实根个数（f 为升幂系数列表或 sympy Poly）"""
    p = f if isinstance(f, Poly) else Poly(list(reversed(list(f))), X, domain="QQ")
    if p.degree() < 1:
        return 0
    chain = [q for q in sturm(p) if not q.is_zero]

    def sign_changes(signs: List[int]) -> int:
        signs = [s for s in signs if s != 0]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    def lc_sign(q: Poly) -> int:
        return 1 if q.LC() > 0 else -1

    at_pos = [lc_sign(q) for q in chain]
    at_neg = [lc_sign(q) * (-1) ** q.degree() for q in chain]
    return sign_changes(at_neg) - sign_changes(at_pos)


def admissibility_modulus(o: Order) -> OrderElement:
    """D = ∏_{i | m, 1 ≤ i < m} (1 - ζ^i)"""
    d = o.one()
    for i in range(1, o.m):
        if o.m % i == 0:
            d = o.mul(d, o.one() - o.rotate(o.one(), i))
    return d


def is_admissible(o: Order, c: int) -> bool:
    if c <= 1:
        raise ComputationError("c 必须大于 1")
    return ideal_membership(o, o.integer(c), admissibility_modulus(o))


def smallest_admissible(o: Order) -> int:
    """最小的可容许 c；|N(D)| 总是可容许的"""
    bound = max(2, abs(o.norm(admissibility_modulus(o))))
    for c in range(2, bound + 1):
        if is_admissible(o, c):
            return c
    raise InvariantViolation(f"{o.name}: |N(D)| = {bound} 不可容许")


def admissible_moduli(o: Order, max_points: int) -> List[int]:
    """所有满足 c^n ≤ max_points 的可容许 c"""
    out = []
    c = 2
    while c ** o.n <= max_points:
        if is_admissible(o, c):
            out.append(c)
        c += 1
    return out


# ---- 单位根极大性 ----

class MuVerdict(str, Enum):
    VERIFIED = "Verified"
    NECESSARY_CONDITIONS_PASS = "NecessaryConditionsPass"
    FAILED = "Failed"


def probe_primes(o: Order) -> List[int]:
    """前 MU_PROBE_COUNT 个不整除 m·disc(f)·den(B) 的素数"""
    f = Poly(list(reversed(o.poly)), X)
    bad = abs(int(o.m * f.discriminant() * o.basis_denominator()))
    out = []
    for q in primerange(2, settings.MU_PROBE_BOUND + 1):
        if bad % q != 0:
            out.append(int(q))
            if len(out) == settings.MU_PROBE_COUNT:
                break
    return out


def _survives_probe(f: Poly, p: int, m: int, q: int) -> bool:
    """ζ_{pm} ∈ R 时，f mod q 的每个不可约因子次数 f_i 都满足 pm | q^{f_i} - 1"""
    if q == p:
        # q 不整除 disc(f)，故 p 在 K 中不分歧，而 Q(ζ_{pm}) 在 p 处分歧
        return False
    factors = Poly(f.as_expr(), X, modulus=q).factor_list()[1]
    return all((q ** Poly(g, X).degree() - 1) % (p * m) == 0 for g, _ in factors)


def verify_mu_maximality(o: Order) -> MuVerdict:
    """检验声明的 μ 是否为全部单位根"""
    candidates = [int(p) for p in primerange(2, o.n + 2) if o.n % int(totient(int(p) * o.m)) == 0]
    if not candidates:
        AuditLogger.log_field_event("mu_maximality", o.name, {"verdict": MuVerdict.VERIFIED.value})
        return MuVerdict.VERIFIED

    f = Poly(list(reversed(o.poly)), X)
    probes = probe_primes(o)
    verdict = MuVerdict.VERIFIED
    for p in candidates:
        refuted = any(not _survives_probe(f, p, o.m, q) for q in probes)
        if refuted:
            logger.debug(f"🔍 ζ_{p * o.m} 被探测素数排除")
            continue
        if len(probes) >= settings.MU_PROBE_COUNT:
            logger.warning(f"❌ {o.name}: ζ_{p * o.m} 通过全部探测，μ 可能不是极大的")
            verdict = MuVerdict.FAILED
            break
        verdict = MuVerdict.NECESSARY_CONDITIONS_PASS

    AuditLogger.log_field_event(
        "mu_maximality", o.name, {"verdict": verdict.value, "candidates": candidates, "probes": probes}
    )
    return verdict


def field_summary(o: Order) -> Dict:
    """analyze 子命令输出的数域不变量"""
    d = admissibility_modulus(o)
    return {
        "name": o.name,
        "n": o.n,
        "m": o.m,
        "poly": [str(c) for c in o.poly],
        "real_places": real_places(o.poly),
        "discriminant": str(o.discriminant()),
        "zeta_matrix": o.zeta_matrix.to_json(),
        "admissibility_modulus": d.to_json(),
        "admissibility_norm": str(abs(o.norm(d))),
        "smallest_admissible_c": smallest_admissible(o),
        "mu_maximality": verify_mu_maximality(o).value,
    }
