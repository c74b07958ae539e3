# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: layered closure search and register permutations.

Semantics are pinned by ``wpf._pykernels``; both modules must agree exactly.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64


def closure(const i64[::1] arities, list tables, Py_ssize_t size, const i64[::1] seeds,
            i64 target=-1, long long budget=-1):
    cdef Py_ssize_t nsym = arities.shape[0]
    cdef Py_ssize_t maxar = 0
    cdef Py_ssize_t s, k, a, pos
    for s in range(nsym):
        if arities[s] > maxar:
            maxar = arities[s]

    order_arr = np.full(size, -1, dtype=np.int64)
    sym_arr = np.full(size, -1, dtype=np.int64)
    ops_arr = np.full((size, max(maxar, 1)), -1, dtype=np.int64)
    layer_arr = np.zeros(size, dtype=np.int64)
    seen_arr = np.zeros(size, dtype=np.uint8)
    cdef i64[::1] order = order_arr
    cdef i64[::1] psym = sym_arr
    cdef i64[:, ::1] pops = ops_arr
    cdef i64[::1] layer = layer_arr
    cdef unsigned char[::1] seen = seen_arr
    cdef const i64[::1] tab
    cdef i64[::1] idx = np.zeros(max(maxar, 1), dtype=np.int64)

    cdef Py_ssize_t count = 0
    cdef long long lookups = 0
    cdef int status = 0
    cdef i64 lab, val, flat
    cdef Py_ssize_t lo, hi, depth, ar
    cdef bint fresh

    for k in range(seeds.shape[0]):
        lab = seeds[k]
        if lab < 0 or lab >= size:
            raise ValueError("seed label out of range")
        if not seen[lab]:
            seen[lab] = 1
            order[count] = lab
            psym[count] = -1
            pops[count, 0] = k
            layer[count] = 0
            count += 1
            if lab == target:
                return (order_arr[:count], sym_arr[:count], ops_arr[:count],
                        layer_arr[:count], lookups, 1)

    lo = 0
    hi = count
    depth = 1
    while True:
        for s in range(nsym):
            ar = arities[s]
            tab = tables[s]
            if ar == 0:
                if depth != 1:
                    continue
            elif hi == 0:
                continue
            for a in range(ar):
                idx[a] = 0
            while True:
                fresh = ar == 0
                for a in range(ar):
                    if idx[a] >= lo:
                        fresh = True
                        break
                if fresh:
                    if budget >= 0 and lookups >= budget:
                        return (order_arr[:count], sym_arr[:count], ops_arr[:count],
                                layer_arr[:count], lookups, 2)
                    flat = 0
                    for a in range(ar):
                        flat = flat * size + order[idx[a]]
                    val = tab[flat]
                    lookups += 1
                    if val < 0:
                        raise ValueError("operation undefined on reached operands")
                    if not seen[val]:
                        seen[val] = 1
                        order[count] = val
                        psym[count] = s
                        for a in range(ar):
                            pops[count, a] = idx[a]
                        layer[count] = depth
                        count += 1
                        if val == target:
                            return (order_arr[:count], sym_arr[:count], ops_arr[:count],
                                    layer_arr[:count], lookups, 1)
                # odometer over operand positions in [0, hi)
                pos = ar - 1
                while pos >= 0:
                    idx[pos] += 1
                    if idx[pos] < hi:
                        break
                    idx[pos] = 0
                    pos -= 1
                if pos < 0:
                    break
        if count == hi:
            break
        lo = hi
        hi = count
        depth += 1
    return (order_arr[:count], sym_arr[:count], ops_arr[:count],
            layer_arr[:count], lookups, 0)


def permute_registers(const cnp.complex128_t[::1] amps, const i64[::1] perm,
                      const i64[::1] shifts, const i64[::1] widths):
    cdef Py_ssize_t total = amps.shape[0]
    cdef Py_ssize_t nreg = shifts.shape[0]
    cdef Py_ssize_t i, r
    cdef i64 local, mask, newlocal, newidx, field
    cdef i64 clear = 0
    out_arr = np.zeros(total, dtype=np.complex128)
    cdef cnp.complex128_t[::1] out = out_arr
    for r in range(nreg):
        clear |= ((<i64>1 << widths[r]) - 1) << shifts[r]
    for i in range(total):
        if amps[i].real == 0 and amps[i].imag == 0:
            continue
        local = 0
        for r in range(nreg):
            mask = (<i64>1 << widths[r]) - 1
            local = (local << widths[r]) | ((i >> shifts[r]) & mask)
        newlocal = perm[local]
        newidx = i & ~clear
        for r in range(nreg - 1, -1, -1):
            mask = (<i64>1 << widths[r]) - 1
            field = newlocal & mask
            newlocal >>= widths[r]
            newidx |= field << shifts[r]
        out[newidx] = amps[i]
    return out_arr
