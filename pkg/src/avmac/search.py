"""Exhaustive, pruned search for zero-error partial-correction codebook tuples.

Candidates stream per user from the antichain enumerator (support
containment inside one codebook is always fatal), get cut by sound
pairwise filters while the tuple is still partial, and the survivors run
the full three-condition verifier.  Every pruning rule only rejects
tuples the full verifier would reject, which the test suite checks by
running filters and verifier independently on exhaustive small sweeps.

For unit state bound the hot loops run on nibble-packed integer sums:
with per-coordinate values below 12, subtraction borrows always produce
a nibble above the state bound, so "difference is a valid state
sequence" becomes two mask tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .codebooks import (
    CodebookTuple,
    Vec,
    check_antichain,
    check_attack_agreement,
    check_union_structure,
    codeword_sum,
    sperner_bound,
    vec_add,
    verify_zero_error,
)
from .feasibility import ceil_frac

CANONICAL_PERM_MAX_N = 7


@dataclass(frozen=True)
class SearchSpec:
    t: int
    n: int
    ell: int
    gamma: Fraction
    sizes: tuple[int, ...]
    symmetry_reduce: bool = True
    budget: int = 20_000_000  # pairwise-filter evaluations + complete candidates
    stop_after: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"block length must be >= 1, got n={self.n}")
        if self.ell < 1:
            raise ValueError(f"state bound must be >= 1, got ell={self.ell}")
        if len(self.sizes) != self.t:
            raise ValueError(f"{len(self.sizes)} sizes for t={self.t} users")
        if any(m < 1 for m in self.sizes):
            raise ValueError("codebook sizes must be >= 1")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        g = Fraction(self.gamma)
        if not 0 < g < 1:
            raise ValueError(f"gamma must lie strictly between 0 and 1, got {g}")


@dataclass
class SearchStats:
    candidates: int = 0  # complete tuples reaching leaf checks
    pruned_pairwise: int = 0  # partial extensions cut by pair filters
    pruned_union: int = 0
    pruned_condition1: int = 0
    pruned_condition2: int = 0
    pruned_condition3: int = 0
    verified: int = 0
    budget_exhausted: bool = False


@dataclass
class SearchResult:
    spec: SearchSpec
    solutions: list[CodebookTuple] = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)


def is_antichain(book: tuple[Vec, ...]) -> bool:
    return check_antichain(book) is None


def enumerate_antichain_codebooks(n: int, size: int):
    """All size-`size` antichain codebooks in {0,1}^n, one per sorted
    codeword set, in lexicographic order."""
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    import math

    limit = math.comb(n, n // 2)
    if size > limit:
        raise ValueError(f"no antichain of size {size} in the {n}-cube (maximum is {limit})")
    vectors = list(itertools.product((0, 1), repeat=n))
    for combo in itertools.combinations(vectors, size):
        if is_antichain(combo):
            yield combo


# ---------------------------------------------------------------------------
# symmetry reduction
# ---------------------------------------------------------------------------


def _apply_column_perm(book: tuple[Vec, ...], perm: tuple[int, ...]) -> tuple[Vec, ...]:
    return tuple(sorted(tuple(w[p] for p in perm) for w in book))


def canonical_book(book: tuple[Vec, ...], perms: list[tuple[int, ...]]) -> tuple[Vec, ...]:
    return min(_apply_column_perm(book, perm) for perm in perms)


def _pair_orbit_invariant(book: tuple[Vec, ...]) -> tuple:
    # complete column-permutation invariant for two-codeword books:
    # overlap count plus the unordered exclusive-support counts
    a, b = book
    c11 = sum(1 for x, y in zip(a, b) if x == 1 and y == 1)
    c10 = sum(1 for x, y in zip(a, b) if x == 1 and y == 0)
    c01 = sum(1 for x, y in zip(a, b) if x == 0 and y == 1)
    return (c11, tuple(sorted((c10, c01))), len(a))


def orbit_representatives(books: list[tuple[Vec, ...]], n: int) -> list[tuple[Vec, ...]]:
    """First book per column-permutation orbit, in stream order."""
    if books and len(books[0]) == 2:
        seen: set[tuple] = set()
        reps = []
        for book in books:
            key = _pair_orbit_invariant(book)
            if key not in seen:
                seen.add(key)
                reps.append(book)
        return reps
    if n > CANONICAL_PERM_MAX_N:
        return books  # orbit filtering skipped; result dedup still applies
    perms = list(itertools.permutations(range(n)))
    seen_keys: set = set()
    reps = []
    for book in books:
        key = canonical_book(book, perms)
        if key not in seen_keys:
            seen_keys.add(key)
            reps.append(book)
    return reps


def canonical_tuple_key(cb: CodebookTuple, perms: list[tuple[int, ...]] | None = None) -> tuple:
    """Orbit key under column permutations and relabeling of equal-size users."""
    n = cb.n
    if perms is None:
        if n > CANONICAL_PERM_MAX_N:
            # too many column permutations; group by a cheap invariant only
            return _tuple_invariant(cb)
        perms = list(itertools.permutations(range(n)))
    sizes = cb.sizes
    best = None
    for perm in perms:
        permuted = [_apply_column_perm(book, perm) for book in cb.codebooks]
        arranged: list[tuple[Vec, ...]] = []
        start = 0
        while start < len(permuted):
            end = start
            while end < len(permuted) and sizes[end] == sizes[start]:
                end += 1
            arranged.extend(sorted(permuted[start:end]))
            start = end
        key = tuple(arranged)
        if best is None or key < best:
            best = key
    return best


def _tuple_invariant(cb: CodebookTuple) -> tuple:
    # multiset over columns of the sorted per-user column sums
    cols = []
    for k in range(cb.n):
        sums = sorted(sum(w[k] for w in book) for book in cb.codebooks)
        cols.append(tuple(sums))
    return tuple(sorted(cols))


FAST_KEY_VARIANT_LIMIT = 2000


class OrbitKeyer:
    """Complete orbit key under column permutations plus relabeling of
    equal-size users, computed without enumerating column permutations.

    For each codeword ordering of every book and each admissible user
    arrangement, the codewords stack into a matrix whose columns are
    packed one byte each; sorting the bytes absorbs the column
    permutations, and the minimum over the remaining finite choices is a
    complete invariant.  User arrangements only permute books that share
    a size group and a per-book column-permutation invariant, which both
    shrinks the variant count and stays sound (orbit members group
    identically).  Per-book packings are cached, so repeated keying over
    a stream of candidates is cheap.
    """

    def __init__(self, sizes: tuple[int, ...]):
        self.sizes = sizes
        self._group_of: list[int] = []
        start = 0
        group = 0
        while start < len(sizes):
            end = start
            while end < len(sizes) and sizes[end] == sizes[start]:
                end += 1
            self._group_of.extend([group] * (end - start))
            group += 1
            start = end
        self._pack_cache: dict[tuple, list[int]] = {}
        self._inv_cache: dict[tuple, tuple] = {}

    def _book_invariant(self, book: tuple[Vec, ...]) -> tuple:
        inv = self._inv_cache.get(book)
        if inv is None:
            weights = tuple(sorted(sum(w) for w in book))
            overlaps = tuple(
                sorted(sum(x & y for x, y in zip(a, b)) for a, b in itertools.combinations(book, 2))
            )
            inv = (weights, overlaps)
            self._inv_cache[book] = inv
        return inv

    def _orderings(self, book: tuple[Vec, ...]) -> list[int]:
        """Byte-per-column packed stacks, one per codeword ordering."""
        packs = self._pack_cache.get(book)
        if packs is None:
            n = len(book[0])
            packs = []
            for order in itertools.permutations(book):
                value = 0
                for k in range(n):
                    col = 0
                    for r, w in enumerate(order):
                        col |= w[k] << r
                    value = (value << 8) | col
                packs.append(value)
            self._pack_cache[book] = packs
        return packs

    def key(self, books: tuple[tuple[Vec, ...], ...]) -> tuple:
        import math

        n = len(books[0][0])
        # books may only trade places within (size group, invariant) cells
        cells: dict[tuple, list[int]] = {}
        for j, book in enumerate(books):
            cells.setdefault((self._group_of[j], self._book_invariant(book)), []).append(j)
        variants = 1
        for members in cells.values():
            variants *= math.factorial(len(members))
        for book in books:
            variants *= math.factorial(len(book))
        if variants > FAST_KEY_VARIANT_LIMIT or n > 24:
            return ("perm",) + tuple(canonical_tuple_key(CodebookTuple(codebooks=books)))

        cell_keys = sorted(cells.keys())
        arrangement_parts = [itertools.permutations(cells[ck]) for ck in cell_keys]
        best = None
        for arrangement in itertools.product(*arrangement_parts):
            user_order = [j for part in arrangement for j in part]
            pack_lists = [self._orderings(books[j]) for j in user_order]
            bit_offsets = []
            off = 0
            for j in user_order:
                bit_offsets.append(off)
                off += len(books[j])
            if off > 8:
                return ("perm",) + tuple(canonical_tuple_key(CodebookTuple(codebooks=books)))
            for combo in itertools.product(*pack_lists):
                merged = 0
                for value, sh in zip(combo, bit_offsets):
                    merged |= value << sh
                key = bytes(sorted(merged.to_bytes(n, "big")))
                if best is None or key < best:
                    best = key
        return ("fast", self.sizes, tuple(cell_keys), best)


def fast_orbit_key(books: tuple[tuple[Vec, ...], ...], sizes: tuple[int, ...]) -> tuple:
    """One-shot convenience wrapper around OrbitKeyer."""
    return OrbitKeyer(sizes).key(books)


# ---------------------------------------------------------------------------
# pairwise pruning (generic tuple form)
# ---------------------------------------------------------------------------


def _pair_sums(book_a: tuple[Vec, ...], book_b: tuple[Vec, ...]) -> list[tuple[Vec, int, int]]:
    return [
        (vec_add(a, b), i, j)
        for i, a in enumerate(book_a)
        for j, b in enumerate(book_b)
    ]


def pair_compatible(
    book_a: tuple[Vec, ...], book_b: tuple[Vec, ...], ell: int, fast3: bool
) -> bool:
    """Sound two-user filter: when the remaining users repeat a codeword on
    both sides, any violation here becomes a full-tuple violation.

    Rejects sum pairs whose difference is a valid state sequence
    (condition 1), equal sums from distinct message pairs (condition 2),
    and, when `fast3` (two differing users already exceed the allowed
    disagreement), pairs differing in both users within state reach.
    """
    entries = _pair_sums(book_a, book_b)
    for (u, ia, ja), (v, ib, jb) in itertools.combinations(entries, 2):
        if u == v:
            return False
        neg = pos = over = False
        for x, y in zip(u, v):
            d = x - y
            if d > ell or d < -ell:
                over = True
                break
            if d > 0:
                pos = True
            elif d < 0:
                neg = True
        if over:
            continue
        if not neg or not pos:
            return False  # one-sided difference: condition 1
        if fast3 and ia != ib and ja != jb:
            return False  # both users differ within state reach: condition 3
    return True


# ---------------------------------------------------------------------------
# nibble-packed fast path (ell == 1)
# ---------------------------------------------------------------------------


def _pack(vec: Vec) -> int:
    value = 0
    for c in vec:
        value = (value << 4) | c
    return value


def _packable(spec: SearchSpec) -> bool:
    # borrow detection needs per-coordinate sums well below a nibble
    return spec.ell == 1 and spec.t <= 8 and spec.n <= 15


class _PackedFilters:
    """Mask tests over base-16 packed sums for unit state bound.

    A subtraction borrow always yields a nibble of at least 16-t > 2, so
    "every nibble in {0,1}" and "every nibble in {0,1,2} and never 3"
    decide membership of differences in {0,1}^n and {-1,0,1}^n exactly.
    """

    def __init__(self, n: int):
        self.ones = int("1" * n, 16)
        self.le1_mask = int("E" * n, 16)
        self.le2_mask = int("C" * n, 16)

    def one_sided(self, d: int) -> bool:
        """d = u - v (nonzero): u - v a valid state sequence in {0,1}^n."""
        return d > 0 and (d & self.le1_mask) == 0

    def within_reach(self, u: int, v: int) -> bool:
        """|u - v| entrywise at most 1."""
        f = u + self.ones - v
        if f & self.le2_mask:
            return False
        return (f & (f >> 1) & self.ones) == 0


def _packed_pair_compatible(
    sums: list[tuple[int, int, int]], filt: _PackedFilters, fast3: bool
) -> bool:
    for (u, ia, ja), (v, ib, jb) in itertools.combinations(sums, 2):
        if u == v:
            return False
        if filt.one_sided(u - v) or filt.one_sided(v - u):
            return False
        if fast3 and ia != ib and ja != jb and filt.within_reach(u, v):
            return False
    return True


# ---------------------------------------------------------------------------
# search driver
# ---------------------------------------------------------------------------


class _BudgetTracker:
    def __init__(self, budget: int, stats: SearchStats):
        self.remaining = budget
        self.stats = stats

    def spend(self, amount: int = 1) -> bool:
        self.remaining -= amount
        if self.remaining < 0:
            self.stats.budget_exhausted = True
            return False
        return True


def search(spec: SearchSpec) -> SearchResult:
    """Run the pruned exhaustive search.

    Deterministic: identical specs produce identical solutions and
    statistics.  When the budget runs out the result is flagged and holds
    whatever was found so far.
    """
    gamma = Fraction(spec.gamma)
    u = ceil_frac(gamma, spec.t)
    need_diff = spec.t - u + 1
    fast3_pair = need_diff <= 2
    # the difference scan decides condition 3 exactly for these shapes
    # (a repeated attacked output always exposes two decompositions that
    # disagree on two users); larger tuples use the ground-truth check
    fast3_complete = spec.t <= 3 and u == spec.t - 1
    union_filter = spec.t == 2 and u == 1 and spec.ell == 1 and all(m > 1 for m in spec.sizes)

    stats = SearchStats()
    result = SearchResult(spec=spec, stats=stats)
    tracker = _BudgetTracker(spec.budget, stats)

    stream_cache: dict[int, list[tuple[Vec, ...]]] = {}
    for size in set(spec.sizes):
        try:
            stream_cache[size] = list(enumerate_antichain_codebooks(spec.n, size))
        except ValueError:
            stream_cache[size] = []  # size beyond the largest antichain: no candidates
    streams = [stream_cache[m] for m in spec.sizes]
    if spec.symmetry_reduce and streams[0]:
        streams[0] = orbit_representatives(streams[0], spec.n)

    found: dict[tuple, CodebookTuple] = {}
    keyer = OrbitKeyer(spec.sizes) if spec.symmetry_reduce else None

    def record(books: tuple[tuple[Vec, ...], ...]) -> bool:
        """Verification and orbit dedup of a filter-surviving tuple;
        returns False when the search should stop.

        For shapes where the leaf difference scan is a complete
        condition-3 test the survivors are already exactly verified, so
        the ground-truth pass is skipped; other shapes ran the
        ground-truth check at the leaf.
        """
        if not fast3_complete:
            cb = CodebookTuple(codebooks=books)
            report = verify_zero_error(cb, spec.ell, gamma, collect_all=False)
            if not report.ok:
                # sound filters should never let this happen; count defensively
                stats.pruned_condition3 += 1
                return True
        stats.verified += 1
        key = keyer.key(books) if keyer is not None else books
        if key not in found:
            found[key] = CodebookTuple(codebooks=books)
        return not (spec.stop_after is not None and len(found) >= spec.stop_after)

    if _packable(spec):
        _search_packed(spec, streams, tracker, stats, need_diff, fast3_pair, fast3_complete, union_filter, record)
    else:
        _search_generic(spec, streams, tracker, stats, gamma, need_diff, fast3_pair, fast3_complete, union_filter, record)

    result.solutions = [found[k] for k in sorted(found.keys())]
    return result


def _order_free_users(spec: SearchSpec) -> list[bool]:
    """ordered[j]: user j's candidate id must not precede user j-1's.

    Sound only under symmetry reduction (relabeling equal-size users maps
    solutions onto ordered ones) for users sharing one full stream.
    """
    ordered = [False] * spec.t
    if not spec.symmetry_reduce:
        return ordered
    for j in range(2, spec.t):
        ordered[j] = spec.sizes[j] == spec.sizes[j - 1]
    return ordered


def _search_packed(spec, streams, tracker, stats, need_diff, fast3_pair, fast3_complete, union_filter, record):
    filt = _PackedFilters(spec.n)
    packed_streams = [
        [tuple(_pack(w) for w in book) for book in stream] for stream in streams
    ]
    # identify identical streams so compatibility rows can be shared
    full_stream = streams[1] if spec.t > 1 else streams[0]
    same_full = all(streams[j] is full_stream or streams[j] == full_stream for j in range(1, spec.t))

    def pair_sums_packed(pa: tuple[int, ...], pb: tuple[int, ...]) -> list[tuple[int, int, int]]:
        return [(a + b, i, j) for i, a in enumerate(pa) for j, b in enumerate(pb)]

    if spec.t == 3 and same_full:
        _search_packed_rows(
            spec, streams, packed_streams, filt, tracker, stats, need_diff,
            fast3_pair, fast3_complete, record, pair_sums_packed
        )
        return

    # small t or mixed sizes: plain recursion on packed books
    ordered = _order_free_users(spec)

    def leaf(books, packed) -> bool:
        if not tracker.spend():
            return False
        stats.candidates += 1
        if union_filter:
            if len(books[0]) + len(books[1]) > sperner_bound(spec.n) or check_union_structure(
                books[0], books[1]
            ) is not None:
                stats.pruned_union += 1
                return True
        sums = []
        for msgs in itertools.product(*(range(m) for m in spec.sizes)):
            total = 0
            for j, i in enumerate(msgs):
                total += packed[j][i]
            sums.append((total, msgs))
        verdict = _packed_leaf_condition(sums, filt, need_diff, fast3_complete)
        if verdict:
            _count_prune(stats, verdict)
            return True
        if not fast3_complete:
            cb = CodebookTuple(codebooks=tuple(books))
            if check_attack_agreement(cb, spec.ell, Fraction(spec.gamma), collect_all=False):
                stats.pruned_condition3 += 1
                return True
        return record(tuple(books))

    def extend(depth: int, chosen: list, chosen_packed: list, last_id: int) -> bool:
        if depth == spec.t:
            return leaf(chosen, chosen_packed)
        start = last_id if ordered[depth] else 0
        stream = streams[depth]
        packed_stream = packed_streams[depth]
        for idx in range(start, len(stream)):
            book = stream[idx]
            pb = packed_stream[idx]
            ok = True
            for prev in chosen_packed:
                if not tracker.spend():
                    return False
                if not _packed_pair_compatible(pair_sums_packed(prev, pb), filt, fast3_pair):
                    stats.pruned_pairwise += 1
                    ok = False
                    break
            if not ok:
                continue
            chosen.append(book)
            chosen_packed.append(pb)
            keep = extend(depth + 1, chosen, chosen_packed, idx)
            chosen.pop()
            chosen_packed.pop()
            if not keep:
                return False
        return True

    extend(0, [], [], 0)


def _search_packed_rows(spec, streams, packed_streams, filt, tracker, stats, need_diff, fast3_pair, fast3_complete, record, pair_sums_packed):
    """t == 3 with one shared full stream: precomputed bitmask
    compatibility rows, then bit iteration with delta-only leaves.

    Sum pairs that keep the third user's codeword fixed were already
    scanned by the pairwise filters backing the row masks, so a leaf only
    tests the cross pairs, expressed as differences of precomputed
    partial sums plus per-book codeword differences.
    """
    full = streams[1]
    packed_full = packed_streams[1]
    m = len(full)
    rows: list[int | None] = [None] * m
    row_budget_ok = True

    ones = filt.ones
    le1_mask = filt.le1_mask
    le2_mask = filt.le2_mask

    def row(idx: int) -> int | None:
        nonlocal row_budget_ok
        cached = rows[idx]
        if cached is not None:
            return cached
        if not row_budget_ok:
            return None
        mask = 0
        pa = packed_full[idx]
        for j in range(m):
            if not tracker.spend():
                row_budget_ok = False
                return None
            if _packed_pair_compatible(pair_sums_packed(pa, packed_full[j]), filt, fast3_pair):
                mask |= 1 << j
            else:
                stats.pruned_pairwise += 1
        rows[idx] = mask
        return mask

    reps = streams[0]
    packed_reps = packed_streams[0]
    ordered = _order_free_users(spec)
    m1_size, m2_size, m3_size = spec.sizes

    # per third-user book: codeword differences with which message pair
    # differs, and msg-index pairs
    third_pairs = list(itertools.combinations(range(m3_size), 2))

    def rep_row(pa: tuple[int, ...]) -> int | None:
        mask = 0
        for j in range(m):
            if not tracker.spend():
                return None
            if _packed_pair_compatible(pair_sums_packed(pa, packed_full[j]), filt, fast3_pair):
                mask |= 1 << j
            else:
                stats.pruned_pairwise += 1
        return mask

    # With symmetry reduction and every user drawing two-codeword books
    # from one shared stream, an orbit is only enumerated under the
    # representative of its lowest-class book, so the free slots may skip
    # books of strictly lower class.
    class_masks: list[int] = []
    if spec.symmetry_reduce and spec.sizes == (2,) * spec.t:
        class_index = {_pair_orbit_invariant(rep): idx for idx, rep in enumerate(reps)}
        book_class = [class_index[_pair_orbit_invariant(b)] for b in full]
        for rep_idx in range(len(reps)):
            mask = 0
            for j, cls in enumerate(book_class):
                if cls >= rep_idx:
                    mask |= 1 << j
            class_masks.append(mask)

    for rep_idx, first_books in enumerate(reps):
        p1 = packed_reps[rep_idx]
        mask0 = rep_row(p1)
        if mask0 is None:
            return
        if class_masks:
            mask0 &= class_masks[rep_idx]
        scan2 = mask0
        while scan2:
            low2 = scan2 & -scan2
            i2 = low2.bit_length() - 1
            scan2 ^= low2
            r2 = row(i2)
            if r2 is None:
                return
            p2 = packed_full[i2]
            pre = [(p1[a] + p2[b], a, b) for a in range(m1_size) for b in range(m2_size)]
            # partial-sum differences between distinct (a, b) message pairs,
            # with the count of differing users among the first two
            pre_pairs = []
            for (ua, a1, b1), (ub, a2, b2) in itertools.combinations(pre, 2):
                pre_pairs.append((ua - ub, (a1 != a2) + (b1 != b2)))
            inter_base = mask0 & r2
            if ordered[2]:
                inter_base &= ~((1 << i2) - 1)
            scan3 = inter_base
            while scan3:
                low3 = scan3 & -scan3
                i3 = low3.bit_length() - 1
                scan3 ^= low3
                if not tracker.spend():
                    return
                stats.candidates += 1
                p3 = packed_full[i3]
                verdict = 0
                for x, y in third_pairs:
                    d3 = p3[x] - p3[y]
                    for dd, diff12 in pre_pairs:
                        for delta in (dd + d3, dd - d3):
                            if delta == 0:
                                verdict = 2
                                break
                            if delta > 0:
                                if (delta & le1_mask) == 0:
                                    verdict = 1
                                    break
                            elif ((-delta) & le1_mask) == 0:
                                verdict = 1
                                break
                            if fast3_complete and diff12 + 1 >= need_diff:
                                f = delta + ones
                                if not (f & le2_mask) and not (f & (f >> 1) & ones):
                                    verdict = 3
                                    break
                        if verdict:
                            break
                    if verdict:
                        break
                if verdict:
                    _count_prune(stats, verdict)
                    continue
                books = (first_books, full[i2], full[i3])
                if not fast3_complete:
                    cb = CodebookTuple(codebooks=books)
                    if check_attack_agreement(cb, spec.ell, Fraction(spec.gamma), collect_all=False):
                        stats.pruned_condition3 += 1
                        continue
                if not record(books):
                    return


def _packed_leaf_condition(sums, filt: _PackedFilters, need_diff: int, fast3_complete: bool) -> int:
    for (u, mu), (v, mv) in itertools.combinations(sums, 2):
        if u == v:
            return 2
        if filt.one_sided(u - v) or filt.one_sided(v - u):
            return 1
        if fast3_complete and filt.within_reach(u, v):
            differing = sum(1 for a, b in zip(mu, mv) if a != b)
            if differing >= need_diff:
                return 3
    return 0


def _count_prune(stats: SearchStats, verdict: int) -> None:
    if verdict == 1:
        stats.pruned_condition1 += 1
    elif verdict == 2:
        stats.pruned_condition2 += 1
    elif verdict == 3:
        stats.pruned_condition3 += 1


def _search_generic(spec, streams, tracker, stats, gamma, need_diff, fast3_pair, fast3_complete, union_filter, record):
    ordered = _order_free_users(spec)
    pair_cache: dict[tuple, bool] = {}

    def pair_ok(a, b) -> bool | None:
        key = (a, b) if a <= b else (b, a)
        hit = pair_cache.get(key)
        if hit is None:
            if not tracker.spend():
                return None
            hit = pair_compatible(a, b, spec.ell, fast3_pair)
            pair_cache[key] = hit
        return hit

    def leaf(books) -> bool:
        if not tracker.spend():
            return False
        stats.candidates += 1
        if union_filter:
            if len(books[0]) + len(books[1]) > sperner_bound(spec.n) or check_union_structure(
                books[0], books[1]
            ) is not None:
                stats.pruned_union += 1
                return True
        cb = CodebookTuple(codebooks=tuple(books))
        sums = [(codeword_sum(cb, msgs), msgs) for msgs in cb.message_tuples()]
        verdict = _leaf_condition(sums, spec.ell, need_diff, fast3_complete)
        if verdict:
            _count_prune(stats, verdict)
            return True
        if not fast3_complete:
            if check_attack_agreement(cb, spec.ell, gamma, collect_all=False):
                stats.pruned_condition3 += 1
                return True
        return record(tuple(books))

    def extend(depth: int, chosen: list, last_id: int) -> bool:
        if depth == spec.t:
            return leaf(chosen)
        start = last_id if ordered[depth] else 0
        stream = streams[depth]
        for idx in range(start, len(stream)):
            book = stream[idx]
            ok = True
            for prev in chosen:
                verdict = pair_ok(prev, book)
                if verdict is None:
                    return False
                if not verdict:
                    stats.pruned_pairwise += 1
                    ok = False
                    break
            if not ok:
                continue
            chosen.append(book)
            keep = extend(depth + 1, chosen, idx)
            chosen.pop()
            if not keep:
                return False
        return True

    extend(0, [], 0)


def _leaf_condition(sums, ell: int, need_diff: int, fast3_complete: bool) -> int:
    """First failing condition over complete-tuple clean sums, or 0.

    With fast3_complete the difference scan decides condition 3 exactly
    (valid once conditions 1 and 2 hold, for tuples where two differing
    users already break the agreement requirement).
    """
    for (u, mu), (v, mv) in itertools.combinations(sums, 2):
        if u == v:
            return 2
        neg = pos = over = False
        for x, y in zip(u, v):
            d = x - y
            if d > ell or d < -ell:
                over = True
                break
            if d > 0:
                pos = True
            elif d < 0:
                neg = True
        if over:
            continue
        if not neg or not pos:
            return 1
        if fast3_complete:
            differing = sum(1 for a, b in zip(mu, mv) if a != b)
            if differing >= need_diff:
                return 3
    return 0
