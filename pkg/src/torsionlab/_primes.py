"""Just enough number theory to read witnesses off invariant factors:
trial division below a fixed bound, then Miller-Rabin on the cofactor."""

TRIAL_LIMIT = 10**6

# Deterministic for n < 3.3e24 with these bases; a safe probable-prime
# test beyond that, which is all a witness report needs.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_probable_prime(n):
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def witness_prime(n, trial_limit=TRIAL_LIMIT):
    """Smallest prime factor of n >= 2 when cheaply discoverable.

    Returns (prime, False) when trial division below `trial_limit` finds a
    factor, when the trial division completes (n itself is prime), or when
    the remaining cofactor passes Miller-Rabin.  Returns (None, True) for a
    composite with no small factor: torsion is still certified, but no
    witnessing prime is reported.
    """
    if n < 2:
        raise ValueError("witness_prime needs n >= 2")
    if n % 2 == 0:
        return 2, False
    if n % 3 == 0:
        return 3, False
    f = 5
    while f * f <= n and f < trial_limit:
        if n % f == 0:
            return f, False
        if n % (f + 2) == 0:
            return f + 2, False
        f += 6
    if f * f > n:
        return n, False
    if is_probable_prime(n):
        return n, False
    return None, True
