"""Regenerates tests/golden/digamma_reference.csv with mpmath at 40 digits."""
import mpmath

mpmath.mp.dps = 40
points = ["0.001", "0.01", "0.1", "0.25", "0.5", "0.75", "1", "1.5", "2", "2.5",
          "3", "5", "7.5", "10", "12.5", "25", "100", "1000", "123456.789", "1000000"]
with open("tests/golden/digamma_reference.csv", "w") as fh:
    fh.write("x,psi\n")
    for p in points:
        fh.write(f"{p},{mpmath.nstr(mpmath.digamma(mpmath.mpf(p)), 25)}\n")
