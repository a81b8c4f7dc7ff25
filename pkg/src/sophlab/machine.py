"""RM1: a self-delimiting two-counter machine with an output tape.

Programs are read bit by bit on demand.  Opcodes form a complete prefix code::

    OUT0 00     OUT1 01     INC 100     DEC 101     SWP 1100
    LOOP 1101   END 11100   READ 11101  HALT 1111

``INC``/``DEC`` act on counter A (``DEC`` saturates at 0), ``SWP`` exchanges
A and B.  ``LOOP ... END`` is a while-loop on A != 0.  ``READ`` loads the next
auxiliary input bit into A, or 2 once the input is exhausted.

Because bits are consumed only when an opcode needs them, a halting run
fixes the bits it read and nothing after them, so the set of programs on
which the machine halts having read exactly all their bits is prefix-free.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .core import BitString

MACHINE_ID = "RM1-v1"

OUT0, OUT1, INC, DEC, SWP, LOOP, END, READ, HALT = range(9)

OPCODE_NAMES = ("OUT0", "OUT1", "INC", "DEC", "SWP", "LOOP", "END", "READ", "HALT")

ENCODING = {
    "00": OUT0,
    "01": OUT1,
    "100": INC,
    "101": DEC,
    "1100": SWP,
    "1101": LOOP,
    "11100": END,
    "11101": READ,
    "1111": HALT,
}

OPCODE_BITS = {op: bits for bits, op in ENCODING.items()}

_MAX_CODE = max(map(len, ENCODING))


def assemble(*names: str) -> BitString:
    """Concatenate opcode encodings, e.g. ``assemble("INC", "HALT")``."""
    return "".join(OPCODE_BITS[OPCODE_NAMES.index(n)] for n in names)


@dataclass(frozen=True)
class Halted:
    output: BitString
    steps: int
    frontier: int


@dataclass(frozen=True)
class NeedsMoreBits:
    frontier: int


@dataclass(frozen=True)
class Aborted:
    reason: str


@dataclass(frozen=True)
class OutOfBudget:
    pass


@dataclass(frozen=True)
class OutputOverflow:
    pass


RunOutcome = Union[Halted, NeedsMoreBits, Aborted, OutOfBudget, OutputOverflow]


@dataclass
class MachineState:
    """Suspended machine, positioned at the start of the next opcode."""

    pc: int = 0
    frontier: int = 0
    counter_a: int = 0
    counter_b: int = 0
    output: str = ""
    loop_stack: list = field(default_factory=list)
    input_head: int = 0
    steps: int = 0
    # > 0 while skipping a loop body whose LOOP saw A == 0
    scan_depth: int = 0

    def copy(self) -> MachineState:
        return MachineState(
            self.pc,
            self.frontier,
            self.counter_a,
            self.counter_b,
            self.output,
            list(self.loop_stack),
            self.input_head,
            self.steps,
            self.scan_depth,
        )


def advance(
    state: MachineState,
    program: BitString,
    aux: BitString,
    step_budget: Optional[int],
    output_cap: Optional[int],
    detect_cycles: bool = True,
) -> RunOutcome:
    """Run ``state`` forward on ``program`` until something other than
    executing an opcode happens.

    On ``NeedsMoreBits`` the state is left at the start of the opcode that
    could not be decoded, so it can be resumed on any extension of
    ``program``.  ``None`` for a budget or cap means unbounded.

    With ``detect_cycles`` an exact repeat of the machine configuration at a
    backward jump is reported as ``OutOfBudget`` straight away; the run would
    reach that outcome anyway, just later.
    """
    budget = step_budget if step_budget is not None else -1
    cap = output_cap if output_cap is not None else -1
    n_bits = len(program)
    enc = ENCODING

    pc = state.pc
    frontier = state.frontier
    a = state.counter_a
    b = state.counter_b
    out = state.output
    stack = state.loop_stack
    head = state.input_head
    steps = state.steps
    depth = state.scan_depth
    seen = set() if detect_cycles else None

    def suspend():
        state.pc = pc
        state.frontier = frontier
        state.counter_a = a
        state.counter_b = b
        state.output = out
        state.input_head = head
        state.steps = steps
        state.scan_depth = depth

    while True:
        # decode one opcode at pc
        op = -1
        k = 2
        while k <= _MAX_CODE:
            end = pc + k
            if end > n_bits:
                if n_bits > frontier:
                    frontier = n_bits
                suspend()
                return NeedsMoreBits(frontier)
            op = enc.get(program[pc:end], -1)
            if op >= 0:
                break
            k += 1
        if op < 0:
            # unreachable with a complete prefix code
            suspend()
            return Aborted("undecodable opcode")
        if end > frontier:
            frontier = end
        if budget >= 0 and steps >= budget:
            suspend()
            return OutOfBudget()
        steps += 1
        pc = end

        if depth:
            if op == LOOP:
                depth += 1
            elif op == END:
                depth -= 1
            continue

        if op == OUT0 or op == OUT1:
            if cap >= 0 and len(out) >= cap:
                suspend()
                return OutputOverflow()
            out += "0" if op == OUT0 else "1"
        elif op == INC:
            a += 1
        elif op == DEC:
            if a:
                a -= 1
        elif op == SWP:
            a, b = b, a
        elif op == LOOP:
            if a:
                stack.append(pc)
            else:
                depth = 1
        elif op == END:
            if not stack:
                suspend()
                return Aborted("END with empty loop stack")
            if a:
                pc = stack[-1]
                if seen is not None:
                    key = (pc, a, b, head, len(out), tuple(stack))
                    if key in seen:
                        suspend()
                        return OutOfBudget()
                    seen.add(key)
            else:
                stack.pop()
        elif op == READ:
            if head < len(aux):
                a = 1 if aux[head] == "1" else 0
                head += 1
            else:
                a = 2
        else:  # HALT
            suspend()
            return Halted(out, steps, frontier)


def run(
    program: BitString,
    aux: BitString = "",
    step_budget: Optional[int] = None,
    output_cap: Optional[int] = None,
    detect_cycles: bool = True,
) -> RunOutcome:
    if step_budget is not None and step_budget < 1:
        raise ValueError("step_budget must be >= 1")
    if output_cap is not None and output_cap < 0:
        raise ValueError("output_cap must be >= 0")
    return advance(MachineState(), program, aux, step_budget, output_cap, detect_cycles)


def in_domain(outcome: RunOutcome, program: BitString) -> bool:
    return isinstance(outcome, Halted) and outcome.frontier == len(program)


def consumed_prefix_behavior(
    program: BitString,
    aux: BitString = "",
    step_budget: Optional[int] = 10_000,
    output_cap: Optional[int] = 64,
) -> list[RunOutcome]:
    """Outcome of ``run`` on every prefix of ``program``, shortest first."""
    return [run(program[:i], aux, step_budget, output_cap) for i in range(len(program) + 1)]
