"""Pure-Python reference for the compiled kernels in ``_kernels.pyx``.

Both implementations return identical results; the test suite checks this.
"""

from itertools import product

import numpy as np


def closure(arities, tables, size, seeds, target=-1, budget=-1):
    """Layered closure of ``seeds`` under table-backed operations.

    Layer 0 holds the seeds in order (first occurrence wins).  Layer ``L``
    applies every symbol, in signature order, to every operand tuple drawn
    lexicographically from the values reached before the layer started, keeping
    only tuples that touch the previous layer.  Nullary symbols fire in layer 1.
    Values are deduplicated; the first derivation found is kept.

    Returns ``(order, sym, ops, layer, lookups, status)`` where ``ops`` holds
    operand *positions* in ``order`` and status is 0 (saturated), 1 (target
    reached) or 2 (budget exhausted).  Seeds store their 0-based input position
    in ``ops[:, 0]`` and ``sym == -1``.
    """
    arities = [int(a) for a in arities]
    maxar = max(arities, default=0)
    order, psym, pops, layer = [], [], [], []
    seen = set()
    lookups = 0

    def pack(status):
        width = max(maxar, 1)
        ops = np.full((len(order), width), -1, dtype=np.int64)
        for row, operands in enumerate(pops):
            ops[row, : len(operands)] = operands
        return (
            np.asarray(order, dtype=np.int64),
            np.asarray(psym, dtype=np.int64),
            ops,
            np.asarray(layer, dtype=np.int64),
            lookups,
            status,
        )

    for k, lab in enumerate(int(x) for x in seeds):
        if not 0 <= lab < size:
            raise ValueError("seed label out of range")
        if lab in seen:
            continue
        seen.add(lab)
        order.append(lab)
        psym.append(-1)
        pops.append((k,))
        layer.append(0)
        if lab == target:
            return pack(1)

    lo, hi, depth = 0, len(order), 1
    while True:
        for s, ar in enumerate(arities):
            if ar == 0 and depth != 1:
                continue
            tab = tables[s]
            for idx in product(range(hi), repeat=ar):
                if ar and max(idx) < lo:
                    continue
                if 0 <= budget <= lookups:
                    return pack(2)
                flat = 0
                for i in idx:
                    flat = flat * size + order[i]
                val = int(tab[flat])
                lookups += 1
                if val < 0:
                    raise ValueError("operation undefined on reached operands")
                if val not in seen:
                    seen.add(val)
                    order.append(val)
                    psym.append(s)
                    pops.append(idx)
                    layer.append(depth)
                    if val == target:
                        return pack(1)
        if len(order) == hi:
            break
        lo, hi, depth = hi, len(order), depth + 1
    return pack(0)


def permute_registers(amps, perm, shifts, widths):
    """Move each amplitude to the basis index obtained by permuting the selected
    register fields; the first listed register is the most significant digit of
    the local label."""
    total = amps.shape[0]
    idx = np.arange(total, dtype=np.int64)
    local = np.zeros(total, dtype=np.int64)
    clear = 0
    for sh, w in zip(shifts, widths):
        mask = (1 << int(w)) - 1
        local = (local << int(w)) | ((idx >> int(sh)) & mask)
        clear |= mask << int(sh)
    newlocal = np.asarray(perm, dtype=np.int64)[local]
    newidx = idx & ~clear
    for sh, w in reversed(list(zip(shifts, widths))):
        mask = (1 << int(w)) - 1
        newidx |= (newlocal & mask) << int(sh)
        newlocal >>= int(w)
    out = np.zeros_like(amps)
    out[newidx] = amps
    return out
