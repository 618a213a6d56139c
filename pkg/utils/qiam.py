"""量子交互抽象机（QIAM）

状态为 (出现, 上下文, 栈, 寄存器)。上下文为正时令牌向结论方向下行，为负时上行；
在公理和切公式处令牌掉头并取对偶上下文。只有离开量子盒子时才作用于寄存器。

寄存器的量子比特顺序：先是上下文的 depth(C) 个比特（从洞向外数），
然后是栈中的符号（栈顶在前）。
"""
import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from jinja2 import Template

from config.config import MAX_QUBITS
from utils.errors import BoundExceededError, DimensionError, PreconditionError, ProofCheckError
from utils.formula import (Box, Context, Diamond, Formula, ParContext, Polarity, StackSymbol,
                           TensorContext, context_at, contexts_for, depth, dual_context,
                           polarity_for, print_context, print_stack, strip_context, wrap_context)
from utils.matrix import StateVector, UnitaryMatrix, adjoint, apply_at
from utils.proof import (Axiom, Cut, OccurrenceId, ParRule, Path, Proof, QRule,
                         TensorRule, check, conclusion, iter_nodes, linkage)

logger = logging.getLogger(__name__)

Stack = Tuple[StackSymbol, ...]


@dataclass(frozen=True)
class GateEvent:
    """一次寄存器变换：在offset处作用gate（backward时作用其伴随）"""
    gate: UnitaryMatrix
    offset: int
    backward: bool = False

    @property
    def effective(self) -> UnitaryMatrix:
        return adjoint(self.gate) if self.backward else self.gate

    def __str__(self):
        return f"{self.gate.label}{'*' if self.backward else ''}@{self.offset}"


@dataclass(frozen=True)
class MachineState:
    occurrence: OccurrenceId
    context: Context
    polarity: Polarity
    stack: Stack = ()
    register: Optional[StateVector] = field(default=None, compare=False)

    @property
    def key(self) -> Tuple[OccurrenceId, Context, Stack]:
        return self.occurrence, self.context, self.stack

    @property
    def register_size(self) -> int:
        return depth(self.context) + len(self.stack)


class Transition(NamedTuple):
    target: MachineState
    event: Optional[GateEvent]


class LegalityCertificate(NamedTuple):
    """出现所在的盒子嵌套：各外层量子规则的元数（最外层在前）"""
    occurrence: OccurrenceId
    blocks: Tuple[int, ...]

    @property
    def expected_stack_length(self) -> int:
        return sum(self.blocks)


FINAL = "final"
STUCK = "stuck"
StepResult = Union[Transition, str]


class OccurrenceGraph:
    """证明的出现图：每个出现在两个方向上的后继及其上下文、栈、门变换"""

    def __init__(self, proof: Proof):
        report = check(proof)
        if not report.ok:
            raise ProofCheckError(report)
        self.proof = proof
        self.nodes: Dict[Path, Proof] = dict(iter_nodes(proof))
        self.sequents = {path: conclusion(node) for path, node in self.nodes.items()}
        self.links = {path: linkage(node) for path, node in self.nodes.items()}
        self.reverse = {path: {link: t for t, link in enumerate(links) if link is not None}
                        for path, links in self.links.items()}
        self.blocks: Dict[Path, Tuple[int, ...]] = {}
        for path in self.nodes:
            self.blocks[path] = tuple(self.nodes[path[:k]].n for k in range(len(path))
                                      if isinstance(self.nodes[path[:k]], QRule))

    def formula(self, occ: OccurrenceId) -> Formula:
        return self.sequents[occ.path][occ.position]

    def occurrences(self) -> Iterator[OccurrenceId]:
        for path, sequent in self.sequents.items():
            for position in range(len(sequent)):
                yield OccurrenceId(path, position)

    def certificate(self, occ: OccurrenceId) -> LegalityCertificate:
        return LegalityCertificate(occ, self.blocks[occ.path])

    def has_legal_stack(self, occurrence: OccurrenceId, stack: Stack) -> bool:
        """栈恰好由各外层盒子的同种符号块组成"""
        offset = 0
        blocks = self.blocks[occurrence.path]
        if len(stack) != sum(blocks):
            return False
        for n in blocks:
            if len(set(stack[offset:offset + n])) != 1:
                return False
            offset += n
        return True

    # ------------------------------------------------------------ 转移

    def step(self, state: MachineState) -> StepResult:
        """确定性的单步转移；寄存器不影响前三个分量"""
        if state.polarity is Polarity.NEGATIVE:
            return self._step_up(state)
        return self._step_down(state)

    def _step_up(self, s: MachineState) -> StepResult:
        path, pos = s.occurrence
        node = self.nodes[path]
        if isinstance(node, Axiom):
            return Transition(MachineState(OccurrenceId(path, 1 - pos), dual_context(s.context),
                                           Polarity.POSITIVE, s.stack), None)
        if isinstance(node, QRule):
            kind, symbol = (Diamond, StackSymbol.DIAMOND) if pos == 0 else (Box, StackSymbol.BOX)
            inner = strip_context(kind, s.context, node.n)
            if inner is None:
                return STUCK
            return Transition(MachineState(OccurrenceId(path + (0,), pos), inner, s.polarity,
                                           s.stack + (symbol,) * node.n), None)
        link = self.links[path][pos]
        if link is None:
            # ⅋/⊗ 的主公式：按洞所在一侧进入对应前提
            c = s.context
            if not isinstance(c, (ParContext, TensorContext)):
                return STUCK
            if isinstance(node, ParRule):
                target = OccurrenceId(path + (0,), node.i if c.hole_on_left else node.j)
            else:
                target = (OccurrenceId(path + (0,), node.i) if c.hole_on_left
                          else OccurrenceId(path + (1,), node.j))
            return Transition(MachineState(target, c.inner, s.polarity, s.stack), None)
        e, k = link
        return Transition(MachineState(OccurrenceId(path + (e,), k), s.context, s.polarity, s.stack), None)

    def _step_down(self, s: MachineState) -> StepResult:
        path, pos = s.occurrence
        if not path:
            return FINAL if not s.stack else STUCK
        parent_path, e = path[:-1], path[-1]
        parent = self.nodes[parent_path]
        if isinstance(parent, Cut) and (e, pos) in ((0, parent.i), (1, parent.j)):
            other = OccurrenceId(parent_path + (1 - e,), parent.j if e == 0 else parent.i)
            return Transition(MachineState(other, dual_context(s.context), Polarity.NEGATIVE, s.stack), None)
        if isinstance(parent, QRule):
            n = parent.n
            if len(s.stack) < n or len(set(s.stack[-n:])) != 1:
                return STUCK
            top = s.stack[-1]
            kind = Diamond if pos == 0 else Box
            own = StackSymbol.DIAMOND if pos == 0 else StackSymbol.BOX
            event = None
            if top is not own:
                event = GateEvent(parent.gate, depth(s.context), backward=(pos == 0))
            target = MachineState(OccurrenceId(parent_path, pos), wrap_context(kind, s.context, n),
                                  s.polarity, s.stack[:-n])
            return Transition(target, event)
        if isinstance(parent, ParRule) and pos in (parent.i, parent.j):
            premise = self.sequents[path]
            on_left = pos == parent.i
            other = premise[parent.j] if on_left else premise[parent.i]
            target = OccurrenceId(parent_path, len(self.sequents[parent_path]) - 1)
            return Transition(MachineState(target, ParContext(s.context, other, on_left),
                                           s.polarity, s.stack), None)
        if isinstance(parent, TensorRule) and (e, pos) in ((0, parent.i), (1, parent.j)):
            on_left = e == 0
            if on_left:
                other = self.sequents[parent_path + (1,)][parent.j]
            else:
                other = self.sequents[parent_path + (0,)][parent.i]
            target = OccurrenceId(parent_path, len(self.sequents[parent_path]) - 1)
            return Transition(MachineState(target, TensorContext(s.context, other, on_left),
                                           s.polarity, s.stack), None)
        t = self.reverse[parent_path][(e, pos)]
        return Transition(MachineState(OccurrenceId(parent_path, t), s.context, s.polarity, s.stack), None)

    # ------------------------------------------------------------ 合法状态

    def legal_states(self) -> Iterator[MachineState]:
        """所有 (出现, 上下文, 合法栈) 三元组（不含寄存器）"""
        for occ in self.occurrences():
            blocks = self.blocks[occ.path]
            for context, polarity in contexts_for(self.formula(occ)):
                for choice in product((StackSymbol.BOX, StackSymbol.DIAMOND), repeat=len(blocks)):
                    stack: Stack = ()
                    for n, symbol in zip(blocks, choice):
                        stack += (symbol,) * n
                    yield MachineState(occ, context, polarity, stack)

    def legal_state_count(self) -> int:
        return sum(len(contexts_for(self.formula(occ))) * 2 ** len(self.blocks[occ.path])
                   for occ in self.occurrences())

    def reachable_states(self) -> List[MachineState]:
        """从各初始状态出发能走到的状态（不含寄存器），包括终止状态"""
        seen: Dict[tuple, MachineState] = {}
        bound = self.legal_state_count()
        for state in self.initial_states():
            for _ in range(bound + 1):
                if state.key in seen:
                    break
                seen[state.key] = state
                result = self.step(state)
                if not isinstance(result, Transition):
                    break
                state = result.target
        return list(seen.values())

    def transition_table(self, reachable_only: bool = False) -> Dict[tuple, Transition]:
        """转移表，键为状态的前三个分量；reachable_only为真时只含可达状态"""
        states = self.reachable_states() if reachable_only else self.legal_states()
        table = {}
        for state in states:
            result = self.step(state)
            if isinstance(result, Transition):
                table[state.key] = result
        return table

    def inverse_table(self) -> Dict[tuple, Tuple[MachineState, Optional[GateEvent]]]:
        """可达状态上的逆转移；不可达的栈顶组合在量子规则处会共享后继，不计入"""
        inverse = {}
        for state in self.reachable_states():
            result = self.step(state)
            if not isinstance(result, Transition):
                continue
            target, event = result
            if target.key in inverse:
                raise PreconditionError(f"转移不是单射：{target.occurrence} 有两个前驱")
            inverse[target.key] = (state, event)
        return inverse

    # ------------------------------------------------------------ 初始状态

    def initial_states(self) -> List[MachineState]:
        states = []
        for position, formula in enumerate(self.sequents[()]):
            for context, polarity in contexts_for(formula):
                if polarity is Polarity.NEGATIVE:
                    states.append(MachineState(OccurrenceId((), position), context, polarity))
        return states

    def initial_state(self, position: int, context: Context,
                      register: Optional[StateVector] = None) -> MachineState:
        sequent = self.sequents[()]
        if not 0 <= position < len(sequent):
            raise PreconditionError(f"入口 {position + 1} 越界（结论共有 {len(sequent)} 个公式）")
        polarity = polarity_for(context, sequent[position])
        if polarity is None:
            raise PreconditionError(f"{print_context(context)} 不是第 {position + 1} 个结论公式的上下文")
        if polarity is not Polarity.NEGATIVE:
            raise PreconditionError(f"{print_context(context)} 对第 {position + 1} 个结论公式是正上下文，需要负上下文")
        if register is not None and register.n_qubits != depth(context):
            raise DimensionError(f"寄存器应有 {depth(context)} 个量子比特，实际为 {register.n_qubits}")
        return MachineState(OccurrenceId((), position), context, polarity, (), register)


def build_occurrence_graph(p: Proof) -> OccurrenceGraph:
    return OccurrenceGraph(p)


# ---------------------------------------------------------------- 运行

@dataclass
class RunResult:
    final: MachineState
    events: List[GateEvent]
    steps: int
    trace: List[str] = field(default_factory=list)


_MACHINE_LINE = Template("{{ index }} {{ occurrence }} {{ context }} {{ stack }}{% if event %} {{ event }}{% endif %}")


def _trace_line(index: int, state: MachineState, event: Optional[GateEvent]) -> str:
    return _MACHINE_LINE.render(index=index, occurrence=state.occurrence, context=print_context(state.context),
                                stack=print_stack(state.stack), event=event)


def step_machine(g: OccurrenceGraph, s: MachineState) -> Union[MachineState, str]:
    """单步转移；带寄存器时同时更新寄存器"""
    result = g.step(s)
    if not isinstance(result, Transition):
        return result
    target, event = result
    register = s.register
    if register is not None and event is not None:
        register = apply_at(event.effective, register, event.offset)
    return MachineState(target.occurrence, target.context, target.polarity, target.stack, register)


def run(g: OccurrenceGraph, initial: MachineState, record_trace: bool = False,
        bound: Optional[int] = None) -> RunResult:
    """从初始状态运行到终止状态，记录每次寄存器变换"""
    if bound is None:
        bound = g.legal_state_count()
    state = initial
    events: List[GateEvent] = []
    trace = [_trace_line(0, state, None)] if record_trace else []
    steps = 0
    while True:
        result = g.step(state)
        if result == FINAL:
            break
        if result == STUCK:
            raise PreconditionError(f"机器在非法栈状态卡住：{state.occurrence} 栈 {print_stack(state.stack)}")
        if steps >= bound:
            raise BoundExceededError(f"机器运行超过 {bound} 步仍未终止")
        target, event = result
        register = state.register
        if event is not None:
            events.append(event)
            if register is not None:
                register = apply_at(event.effective, register, event.offset)
        state = MachineState(target.occurrence, target.context, target.polarity, target.stack, register)
        steps += 1
        if record_trace:
            trace.append(_trace_line(steps, state, event))
    logger.debug("机器运行 %d 步，%d 次门操作", steps, len(events))
    return RunResult(state, events, steps, trace)


def run_backward(g: OccurrenceGraph, final: MachineState) -> RunResult:
    """沿逆转移从终止状态退回初始状态，寄存器上作用各门的伴随"""
    inverse = g.inverse_table()
    state = final
    events: List[GateEvent] = []
    steps = 0
    while state.key in inverse:
        previous, event = inverse[state.key]
        register = state.register
        if event is not None:
            undo = GateEvent(event.gate, event.offset, not event.backward)
            events.append(undo)
            if register is not None:
                register = apply_at(undo.effective, register, undo.offset)
        state = MachineState(previous.occurrence, previous.context, previous.polarity, previous.stack, register)
        steps += 1
    return RunResult(state, events, steps)


# ---------------------------------------------------------------- 语义

@dataclass
class SemanticsResult:
    entry: OccurrenceId
    entry_context: Context
    exit: OccurrenceId
    exit_context: Context
    unitary: UnitaryMatrix
    events: List[GateEvent]


def compose_events(events: Sequence[GateEvent], n_qubits: int) -> np.ndarray:
    """按遍历顺序组合：[g1..gk] 得到 embed(gk)·…·embed(g1)"""
    columns = np.eye(2 ** n_qubits, dtype=complex)
    for event in events:
        columns = apply_at(event.effective, columns, event.offset)
    return columns


def resolve_context(p: Proof, spec: str = "auto", entry: Optional[int] = None) -> Tuple[int, Context]:
    """解析入口与负上下文：auto取唯一的负上下文，否则按洞路径 k.S1.S2... 解析（k从1开始）"""
    sequent = conclusion(p)
    if spec == "auto":
        positions = range(len(sequent)) if entry is None else [entry]
        candidates = [(k, c) for k in positions if 0 <= k < len(sequent)
                      for c, pol in contexts_for(sequent[k]) if pol is Polarity.NEGATIVE]
        if len(candidates) != 1:
            raise PreconditionError(f"auto 需要唯一的负上下文，实际找到 {len(candidates)} 个")
        return candidates[0]
    parts = [part for part in spec.split(".") if part]
    if not parts or not parts[0].isdigit():
        raise PreconditionError(f"上下文路径 {spec!r} 必须以公式序号开头")
    position = int(parts[0]) - 1
    if entry is not None and entry != position:
        raise PreconditionError(f"上下文路径指向第 {position + 1} 个公式，与入口 {entry + 1} 不一致")
    if not 0 <= position < len(sequent):
        raise PreconditionError(f"公式序号 {position + 1} 越界（结论共有 {len(sequent)} 个公式）")
    return position, context_at(sequent[position], [part.upper() for part in parts[1:]])


def semantics_relative(p: Proof, entry: int, context: Context,
                       graph: Optional[OccurrenceGraph] = None) -> SemanticsResult:
    """在不依赖寄存器内容的情况下符号地计算 ⟦p⟧_N"""
    g = graph or OccurrenceGraph(p)
    initial = g.initial_state(entry, context)
    n = depth(context)
    if n > MAX_QUBITS:
        raise DimensionError(f"上下文深度 {n} 超过量子比特上限 {MAX_QUBITS}")
    result = run(g, initial)
    unitary = UnitaryMatrix(compose_events(result.events, n))
    return SemanticsResult(initial.occurrence, context, result.final.occurrence, result.final.context,
                           unitary, result.events)


def extract_gate_sequence(p: Proof, entry: int, context: Context) -> List[Tuple[UnitaryMatrix, int]]:
    """按机器遍历顺序给出 (门, 偏移) 序列"""
    result = semantics_relative(p, entry, context)
    return [(event.effective, event.offset) for event in result.events]


def run_register(p: Proof, entry: int, context: Context, register: Optional[StateVector] = None,
                 record_trace: bool = False) -> RunResult:
    """在具体寄存器上运行，缺省为 |0…0⟩"""
    g = OccurrenceGraph(p)
    if register is None:
        register = StateVector.zero(depth(context))
    return run(g, g.initial_state(entry, context, register), record_trace=record_trace)


__all__ = [
    "OccurrenceGraph", "MachineState", "GateEvent", "LegalityCertificate", "RunResult", "SemanticsResult",
    "build_occurrence_graph", "step_machine", "run", "run_backward", "semantics_relative",
    "extract_gate_sequence", "resolve_context", "run_register", "compose_events",
]
