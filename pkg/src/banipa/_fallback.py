"""Pure-Python versions of the hot kernels.

Kept behaviourally identical to ``_core.pyx``; the test suite checks both.
"""

# character class codes shared with the compiled core
BANGLA_LETTER = 0
BANGLA_DIGIT = 1
WHITESPACE = 2
PUNCTUATION = 3
FOREIGN_LETTER = 4
OTHER_SYMBOL = 5

BASE_PUNCTUATION = frozenset(
    "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~" "।॥‘’“”–—"
)


def classify_code(ch, extra=frozenset()):
    cp = ord(ch)
    if 0x09E6 <= cp <= 0x09EF:
        return BANGLA_DIGIT
    if 0x0980 <= cp <= 0x09FF:
        return BANGLA_LETTER
    if ch.isspace():
        return WHITESPACE
    if ch in BASE_PUNCTUATION or ch in extra:
        return PUNCTUATION
    if ch.isalpha() or 0x30 <= cp <= 0x39:
        return FOREIGN_LETTER
    return OTHER_SYMBOL


def char_runs(text, extra=frozenset()):
    """Split ``text`` into ``(class, start, end)`` runs; punctuation never merges."""
    runs = []
    n = len(text)
    i = 0
    while i < n:
        cls = classify_code(text[i], extra)
        j = i + 1
        if cls != PUNCTUATION:
            while j < n and classify_code(text[j], extra) == cls:
                j += 1
        runs.append((cls, i, j))
        i = j
    return runs


def edit_ops(ref, hyp):
    """Minimal edit alignment of two int sequences.

    Returns ``(substitutions, deletions, insertions)`` from one optimal
    backtrace, preferring the diagonal move, then deletion, then insertion.
    """
    n, m = len(ref), len(hyp)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dp[i][0] = i
    for j in range(m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        r = ref[i - 1]
        row, prev = dp[i], dp[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (r != hyp[j - 1])
            up = prev[j] + 1
            left = row[j - 1] + 1
            row[j] = min(diag, up, left)

    s = d = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            cost = ref[i - 1] != hyp[j - 1]
            if dp[i][j] == dp[i - 1][j - 1] + cost:
                s += cost
                i -= 1
                j -= 1
                continue
        if i > 0 and dp[i][j] == dp[i - 1][j] + 1:
            d += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return s, d, ins
