"""Relative smoothness of eight reference training-image variances."""

from oagrade.features import smoothness

ROWS = [
    (2542.55, "1"),
    (1550.28, "0.999"),
    (3959.754, "1"),
    (605.424, "0.998"),
    (3498.11, "1"),
    (3799.3, "1"),
    (2246.89, "1"),
    (997.393, "0.999"),
]

if __name__ == "__main__":
    print(f"{'variance':>10} {'R':>10} {'R (3 dp)':>9} {'printed':>8}")
    for var, printed in ROWS:
        r = smoothness(var)
        ok = float(printed) == round(r, 3)
        print(f"{var:>10} {r:>10.6f} {r:>9.3f} {printed:>8}  {'ok' if ok else 'MISMATCH'}")
