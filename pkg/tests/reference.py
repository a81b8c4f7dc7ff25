"""Slow, independent RM1 interpreter used as a test oracle.

It shares no code with ``sophlab.machine``: opcodes are decoded by walking a
bit trie, and every executed opcode is appended to a trace so fixtures can
be compared against hand-stepped listings.
"""

TRIE = {}
for name, code in [
    ("OUT0", "00"),
    ("OUT1", "01"),
    ("INC", "100"),
    ("DEC", "101"),
    ("SWP", "1100"),
    ("LOOP", "1101"),
    ("END", "11100"),
    ("READ", "11101"),
    ("HALT", "1111"),
]:
    node = TRIE
    for bit in code[:-1]:
        node = node.setdefault(bit, {})
    node[code[-1]] = name


def reference_run(program, aux="", budget=None, cap=None):
    """Returns (tag, payload, trace).

    tag is one of "halted", "needs", "aborted", "budget", "overflow"; payload
    is (output, steps, frontier) for "halted" and frontier for "needs".
    """
    trace = []
    pos = 0
    read_upto = 0
    a = b = 0
    out = []
    stack = []
    head = 0
    skipping = 0

    while True:
        node = TRIE
        start = pos
        while isinstance(node, dict):
            if pos >= len(program):
                return "needs", max(read_upto, len(program)), trace
            node = node[program[pos]]
            pos += 1
        name = node
        read_upto = max(read_upto, pos)
        if budget is not None and len(trace) >= budget:
            return "budget", None, trace
        trace.append((start, name))

        if skipping:
            if name == "LOOP":
                skipping += 1
            elif name == "END":
                skipping -= 1
            continue
        if name in ("OUT0", "OUT1"):
            if cap is not None and len(out) >= cap:
                return "overflow", None, trace
            out.append(name[-1])
        elif name == "INC":
            a += 1
        elif name == "DEC":
            a = max(0, a - 1)
        elif name == "SWP":
            a, b = b, a
        elif name == "LOOP":
            if a != 0:
                stack.append(pos)
            else:
                skipping = 1
        elif name == "END":
            if not stack:
                return "aborted", None, trace
            if a != 0:
                pos = stack[-1]
            else:
                stack.pop()
        elif name == "READ":
            if head < len(aux):
                a = int(aux[head])
                head += 1
            else:
                a = 2
        elif name == "HALT":
            return "halted", ("".join(out), len(trace), read_upto), trace


def as_tag(outcome):
    """Map a sophlab outcome to the reference tag/payload pair."""
    from sophlab.machine import Aborted, Halted, NeedsMoreBits, OutOfBudget, OutputOverflow

    if isinstance(outcome, Halted):
        return "halted", (outcome.output, outcome.steps, outcome.frontier)
    if isinstance(outcome, NeedsMoreBits):
        return "needs", outcome.frontier
    if isinstance(outcome, Aborted):
        return "aborted", None
    if isinstance(outcome, OutOfBudget):
        return "budget", None
    if isinstance(outcome, OutputOverflow):
        return "overflow", None
    raise TypeError(outcome)
