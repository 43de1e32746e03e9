#!/usr/bin/env python3
"""Regenerate the 64-node Gauss-Legendre table embedded in include/fluoro/quadrature.hpp."""
import numpy as np

x, w = np.polynomial.legendre.leggauss(64)
print("// 64-node Gauss-Legendre nodes/weights on [-1,1], generated by tools/make_quadrature_table.py")
print("inline constexpr double kGL64Nodes[64] = {")
for i in range(0, 64, 4):
    print("    " + ", ".join("%.17g" % v for v in x[i:i+4]) + ",")
print("};")
print("inline constexpr double kGL64Weights[64] = {")
for i in range(0, 64, 4):
    print("    " + ", ".join("%.17g" % v for v in w[i:i+4]) + ",")
print("};")
