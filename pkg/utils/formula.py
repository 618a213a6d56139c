"""QMLL公式、上下文与栈的语法

公式文法（空白无关）：
    F ::= ident | "~" ident | "(" F "%" F ")" | "(" F "*" F ")" | "[]" F | "<>" F

上下文是只含一个洞 [.] 的公式，洞总是位于原子出现处。
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

from utils.errors import PreconditionError
from utils.scanner import Scanner

logger = logging.getLogger(__name__)


class Polarity(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    def flip(self) -> "Polarity":
        return Polarity.NEGATIVE if self is Polarity.POSITIVE else Polarity.POSITIVE


class StackSymbol(str, Enum):
    BOX = "[]"
    DIAMOND = "<>"

    def flip(self) -> "StackSymbol":
        return StackSymbol.DIAMOND if self is StackSymbol.BOX else StackSymbol.BOX


# 栈用元组表示，最后一个元素为栈顶
Stack = Tuple[StackSymbol, ...]


def print_stack(stack: Sequence[StackSymbol]) -> str:
    return "".join(symbol.value for symbol in stack) or "ε"


# ---------------------------------------------------------------- 公式

@dataclass(frozen=True)
class Atom:
    name: str
    negative: bool = False

    def __str__(self):
        return print_formula(self)


@dataclass(frozen=True)
class Par:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return print_formula(self)


@dataclass(frozen=True)
class Tensor:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return print_formula(self)


@dataclass(frozen=True)
class Box:
    body: "Formula"

    def __str__(self):
        return print_formula(self)


@dataclass(frozen=True)
class Diamond:
    body: "Formula"

    def __str__(self):
        return print_formula(self)


Formula = Union[Atom, Par, Tensor, Box, Diamond]
MODALITIES = (Box, Diamond)


def dual(f: Formula) -> Formula:
    """德摩根对偶，是一个对合"""
    if isinstance(f, Atom):
        return Atom(f.name, not f.negative)
    if isinstance(f, Par):
        return Tensor(dual(f.left), dual(f.right))
    if isinstance(f, Tensor):
        return Par(dual(f.left), dual(f.right))
    if isinstance(f, Box):
        return Diamond(dual(f.body))
    return Box(dual(f.body))


def is_modal(f: Formula) -> bool:
    return isinstance(f, MODALITIES)


def size(f: Formula) -> int:
    """公式树的结点数"""
    if isinstance(f, Atom):
        return 1
    if isinstance(f, (Par, Tensor)):
        return 1 + size(f.left) + size(f.right)
    return 1 + size(f.body)


def modal_prefix_length(f: Formula) -> int:
    """最外层连续模态的个数（不区分种类）"""
    n = 0
    while is_modal(f):
        f = f.body
        n += 1
    return n


def leading_run(f: Formula) -> Tuple[Optional[type], int, Formula]:
    """最外层同种模态的最长连续段：(模态类, 个数, 剥去后的公式)"""
    if not is_modal(f):
        return None, 0, f
    kind = type(f)
    n = 0
    while isinstance(f, kind):
        f = f.body
        n += 1
    return kind, n, f


def wrap(kind: type, f: Formula, n: int) -> Formula:
    for _ in range(n):
        f = kind(f)
    return f


def strip(kind: type, f: Formula, n: int) -> Optional[Formula]:
    """剥去n个指定模态，不足时返回None"""
    for _ in range(n):
        if not isinstance(f, kind):
            return None
        f = f.body
    return f


def atoms(f: Formula) -> List[Atom]:
    """从左到右列出原子出现"""
    if isinstance(f, Atom):
        return [f]
    if isinstance(f, (Par, Tensor)):
        return atoms(f.left) + atoms(f.right)
    return atoms(f.body)


# ---------------------------------------------------------------- 上下文

@dataclass(frozen=True)
class Hole:
    def __str__(self):
        return "[.]"


@dataclass(frozen=True)
class ParContext:
    inner: "Context"
    other: Formula
    hole_on_left: bool

    def __str__(self):
        return print_context(self)


@dataclass(frozen=True)
class TensorContext:
    inner: "Context"
    other: Formula
    hole_on_left: bool

    def __str__(self):
        return print_context(self)


@dataclass(frozen=True)
class BoxContext:
    inner: "Context"

    def __str__(self):
        return print_context(self)


@dataclass(frozen=True)
class DiamondContext:
    inner: "Context"

    def __str__(self):
        return print_context(self)


Context = Union[Hole, ParContext, TensorContext, BoxContext, DiamondContext]
HOLE = Hole()

_CONTEXT_OF = {Par: ParContext, Tensor: TensorContext, Box: BoxContext, Diamond: DiamondContext}
_FORMULA_OF = {ParContext: Par, TensorContext: Tensor, BoxContext: Box, DiamondContext: Diamond}


def subst(c: Context, f: Formula) -> Formula:
    """用f替换洞"""
    if isinstance(c, Hole):
        return f
    if isinstance(c, (ParContext, TensorContext)):
        filled = subst(c.inner, f)
        pair = (filled, c.other) if c.hole_on_left else (c.other, filled)
        return _FORMULA_OF[type(c)](*pair)
    return _FORMULA_OF[type(c)](subst(c.inner, f))


def depth(c: Context) -> int:
    """洞所在的模态嵌套层数"""
    n = 0
    while not isinstance(c, Hole):
        if isinstance(c, (BoxContext, DiamondContext)):
            n += 1
        c = c.inner
    return n


def dual_context(c: Context) -> Context:
    if isinstance(c, Hole):
        return c
    if isinstance(c, ParContext):
        return TensorContext(dual_context(c.inner), dual(c.other), c.hole_on_left)
    if isinstance(c, TensorContext):
        return ParContext(dual_context(c.inner), dual(c.other), c.hole_on_left)
    if isinstance(c, BoxContext):
        return DiamondContext(dual_context(c.inner))
    return BoxContext(dual_context(c.inner))


def wrap_context(kind: type, c: Context, n: int) -> Context:
    """在上下文外层加n个模态，kind为Box或Diamond"""
    for _ in range(n):
        c = _CONTEXT_OF[kind](c)
    return c


def strip_context(kind: type, c: Context, n: int) -> Optional[Context]:
    context_kind = _CONTEXT_OF[kind]
    for _ in range(n):
        if not isinstance(c, context_kind):
            return None
        c = c.inner
    return c


def polarity_for(c: Context, f: Formula) -> Optional[Polarity]:
    """C对f为正（f = C[α]）或负（f = C[α⊥]）；形状不符时返回None"""
    while not isinstance(c, Hole):
        if type(f) is not _FORMULA_OF[type(c)]:
            return None
        if isinstance(c, (ParContext, TensorContext)):
            other, f = (f.right, f.left) if c.hole_on_left else (f.left, f.right)
            if other != c.other:
                return None
        else:
            f = f.body
        c = c.inner
    if not isinstance(f, Atom):
        return None
    return Polarity.NEGATIVE if f.negative else Polarity.POSITIVE


def contexts_for(f: Formula) -> List[Tuple[Context, Polarity]]:
    """按从左到右的原子出现列出所有上下文及其极性"""
    if isinstance(f, Atom):
        return [(HOLE, Polarity.NEGATIVE if f.negative else Polarity.POSITIVE)]
    if isinstance(f, (Par, Tensor)):
        kind = _CONTEXT_OF[type(f)]
        left = [(kind(c, f.right, True), p) for c, p in contexts_for(f.left)]
        right = [(kind(c, f.left, False), p) for c, p in contexts_for(f.right)]
        return left + right
    kind = _CONTEXT_OF[type(f)]
    return [(kind(c), p) for c, p in contexts_for(f.body)]


def context_at(f: Formula, steps: Sequence[str]) -> Context:
    """按洞路径（L/R下降二元结点，M或L下降模态结点）取出上下文"""
    layers = []
    node = f
    for step in steps:
        if isinstance(node, (Par, Tensor)):
            if step not in ("L", "R"):
                raise PreconditionError(f"在 {print_formula(node)} 处路径步 {step!r} 无效，应为 L 或 R")
            on_left = step == "L"
            layers.append((type(node), node.right if on_left else node.left, on_left))
            node = node.left if on_left else node.right
        elif is_modal(node):
            if step not in ("M", "L"):
                raise PreconditionError(f"在 {print_formula(node)} 处路径步 {step!r} 无效，应为 M")
            layers.append((type(node), None, None))
            node = node.body
        else:
            raise PreconditionError(f"路径越过了原子 {print_formula(node)}")
    if not isinstance(node, Atom):
        raise PreconditionError(f"洞路径必须停在原子上，实际停在 {print_formula(node)}")
    c: Context = HOLE
    for kind, other, on_left in reversed(layers):
        if other is None:
            c = _CONTEXT_OF[kind](c)
        else:
            c = _CONTEXT_OF[kind](c, other, on_left)
    return c


def hole_steps(c: Context) -> List[str]:
    steps = []
    while not isinstance(c, Hole):
        if isinstance(c, (ParContext, TensorContext)):
            steps.append("L" if c.hole_on_left else "R")
        else:
            steps.append("M")
        c = c.inner
    return steps


# ---------------------------------------------------------------- 文本

def print_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return ("~" if f.negative else "") + f.name
    if isinstance(f, Par):
        return f"({print_formula(f.left)} % {print_formula(f.right)})"
    if isinstance(f, Tensor):
        return f"({print_formula(f.left)} * {print_formula(f.right)})"
    if isinstance(f, Box):
        return "[]" + print_formula(f.body)
    return "<>" + print_formula(f.body)


def print_context(c: Context) -> str:
    if isinstance(c, Hole):
        return "[.]"
    if isinstance(c, (ParContext, TensorContext)):
        op = "%" if isinstance(c, ParContext) else "*"
        inner, other = print_context(c.inner), print_formula(c.other)
        return f"({inner} {op} {other})" if c.hole_on_left else f"({other} {op} {inner})"
    prefix = "[]" if isinstance(c, BoxContext) else "<>"
    return prefix + print_context(c.inner)


def read_formula(scanner: Scanner) -> Formula:
    """从扫描器读取一个公式（供证明解析复用）"""
    if scanner.accept("[]"):
        return Box(read_formula(scanner))
    if scanner.accept("<>"):
        return Diamond(read_formula(scanner))
    if scanner.accept("~"):
        return Atom(scanner.read_ident(), True)
    if scanner.accept("("):
        left = read_formula(scanner)
        if scanner.accept("%"):
            kind = Par
        elif scanner.accept("*"):
            kind = Tensor
        else:
            scanner.fail("期望 '%' 或 '*'")
        right = read_formula(scanner)
        scanner.expect(")")
        return kind(left, right)
    return Atom(scanner.read_ident(), False)


def parse_formula(text: str) -> Formula:
    scanner = Scanner(text)
    f = read_formula(scanner)
    scanner.expect_end()
    return f


__all__ = [
    "Atom", "Par", "Tensor", "Box", "Diamond", "Formula",
    "Hole", "ParContext", "TensorContext", "BoxContext", "DiamondContext", "Context", "HOLE",
    "Polarity", "StackSymbol", "Stack",
    "dual", "is_modal", "size", "depth", "subst", "dual_context", "polarity_for", "contexts_for",
    "context_at", "hole_steps", "parse_formula", "print_formula", "print_context", "print_stack",
]
