import os

#: Feasibility tolerance for every downstream flow check; override via TWROUTER_EPS.
EPS = float(os.environ.get("TWROUTER_EPS", "1e-7"))


def close(a, b, eps=None):
    eps = EPS if eps is None else eps
    return abs(a - b) <= eps * max(1.0, abs(a), abs(b))


def leq(a, b, eps=None):
    eps = EPS if eps is None else eps
    return a <= b + eps * max(1.0, abs(a), abs(b))
