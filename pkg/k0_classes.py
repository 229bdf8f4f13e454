"""K_0(C*(R⋊μ)) 的符号基与系数向量。

基标签分四类：Unit（类 [1]）、Inf(k, idx)（无限部分中 [1] 以外的有理方向）、
Fin(l, χ)（极大有限子群类 l ≠ (μ) 上的非平凡特征标）、Mu(χ)（μ 的非平凡特征标）。
特征标 χ_t 以下标 t 记录：χ_t(生成元) = exp(2πit/|M|)。
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, Iterator, List, Optional, Tuple

if TYPE_CHECKING:
    from semidirect_group import FiniteSubgroupLabel

_KIND_ORDER = {"unit": 0, "inf": 1, "fin": 2, "mu": 3}


@dataclass(frozen=True)
class K0Label:
    kind: str
    k: int = 0
    index: int = 0
    subgroup: Optional["FiniteSubgroupLabel"] = None
    chi: int = 0

    def __post_init__(self):
        if self.kind not in _KIND_ORDER:
            raise ValueError(f"未知的基标签类型: {self.kind}")

    @classmethod
    def unit(cls) -> "K0Label":
        return cls("unit")

    @classmethod
    def inf(cls, k: int, index: int) -> "K0Label":
        return cls("inf", k=k, index=index)

    @classmethod
    def fin(cls, subgroup: "FiniteSubgroupLabel", chi: int) -> "K0Label":
        return cls("fin", subgroup=subgroup, chi=chi)

    @classmethod
    def mu(cls, chi: int) -> "K0Label":
        return cls("mu", chi=chi)

    def sort_key(self) -> Tuple:
        sub = self.subgroup.sort_key() if self.subgroup is not None else ()
        return (_KIND_ORDER[self.kind], self.k, self.index, sub, self.chi)

    def __lt__(self, other: "K0Label") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if self.kind == "unit":
            return "[1]"
        if self.kind == "inf":
            return f"Inf(k={self.k},{self.index})"
        if self.kind == "fin":
            return f"Fin({self.subgroup},χ{self.chi})"
        return f"Mu(χ{self.chi})"

    def to_json(self) -> Dict:
        data: Dict = {"kind": self.kind}
        if self.kind == "inf":
            data.update({"k": self.k, "index": self.index})
        elif self.kind == "fin":
            data.update({"subgroup": self.subgroup.to_json(), "chi": self.chi})
        elif self.kind == "mu":
            data["chi"] = self.chi
        return data


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class K0Vector:
    """有限支撑的系数映射 K0Label → Q，按标签顺序存储"""

    terms: Tuple[Tuple[K0Label, Fraction], ...] = ()

    @classmethod
    def from_dict(cls, coeffs: Dict[K0Label, object]) -> "K0Vector":
        items = [(label, Fraction(value)) for label, value in coeffs.items() if Fraction(value) != 0]
        return cls(tuple(sorted(items, key=lambda item: item[0].sort_key())))

    @classmethod
    def of(cls, label: K0Label, coefficient=1) -> "K0Vector":
        return cls.from_dict({label: coefficient})

    def as_dict(self) -> Dict[K0Label, Fraction]:
        return dict(self.terms)

    def coefficient(self, label: K0Label) -> Fraction:
        return self.as_dict().get(label, Fraction(0))

    def support(self) -> List[K0Label]:
        return [label for label, _ in self.terms]

    def __iter__(self) -> Iterator[Tuple[K0Label, Fraction]]:
        return iter(self.terms)

    def __add__(self, other: "K0Vector") -> "K0Vector":
        acc = self.as_dict()
        for label, value in other.terms:
            acc[label] = acc.get(label, Fraction(0)) + value
        return K0Vector.from_dict(acc)

    def __sub__(self, other: "K0Vector") -> "K0Vector":
        return self + other.scale(-1)

    def scale(self, k) -> "K0Vector":
        return K0Vector.from_dict({label: value * k for label, value in self.terms})

    def is_zero(self) -> bool:
        return not self.terms

    def is_integral(self) -> bool:
        return all(value.denominator == 1 for _, value in self.terms)

    def to_json(self) -> Dict[str, str]:
        return {str(label): _fmt(value) for label, value in self.terms}

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{_fmt(v)}·{label}" for label, v in self.terms)
