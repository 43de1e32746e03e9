#pragma once
// Fixed 64-node Gauss-Legendre rule; enough for the smooth windowed-
// correlation integrands here (they are piecewise-analytic; callers split
// segments at the |tau| kinks themselves).
#include <vector>
#include <algorithm>
#include <cmath>

namespace fluoro {

// 64-node Gauss-Legendre nodes/weights on [-1,1], generated by tools/make_quadrature_table.py
inline constexpr double kGL64Nodes[64] = {
    -0.99930504173577217, -0.99634011677195522, -0.99101337147674429, -0.98333625388462598,
    -0.97332682778991098, -0.96100879965205377, -0.94641137485840277, -0.92956917213193957,
    -0.91052213707850282, -0.88931544599511414, -0.86599939815409277, -0.84062929625258032,
    -0.81326531512279754, -0.78397235894334139, -0.75281990726053194, -0.71988185017161077,
    -0.68523631305423327, -0.64896547125465731, -0.61115535517239328, -0.571895646202634,
    -0.53127946401989457, -0.48940314570705296, -0.44636601725346409, -0.40227015796399163,
    -0.35722015833766813, -0.31132287199021097, -0.26468716220876742, -0.21742364374000708,
    -0.1696444204239928, -0.12146281929612056, -0.072993121787799042, -0.024350292663424429,
    0.024350292663424429, 0.072993121787799042, 0.12146281929612056, 0.1696444204239928,
    0.21742364374000708, 0.26468716220876742, 0.31132287199021097, 0.35722015833766813,
    0.40227015796399163, 0.44636601725346409, 0.48940314570705296, 0.53127946401989457,
    0.571895646202634, 0.61115535517239328, 0.64896547125465731, 0.68523631305423327,
    0.71988185017161077, 0.75281990726053194, 0.78397235894334139, 0.81326531512279754,
    0.84062929625258032, 0.86599939815409277, 0.88931544599511414, 0.91052213707850282,
    0.92956917213193957, 0.94641137485840277, 0.96100879965205377, 0.97332682778991098,
    0.98333625388462598, 0.99101337147674429, 0.99634011677195522, 0.99930504173577217,
};
inline constexpr double kGL64Weights[64] = {
    0.0017832807216942152, 0.0041470332605629233, 0.0065044579689796543, 0.008846759826364391,
    0.011168139460131466, 0.013463047896718231, 0.015726030476025082, 0.017951715775697302,
    0.020134823153530094, 0.022270173808383007, 0.024352702568710853, 0.026377469715054627,
    0.028339672614259702, 0.030234657072402495, 0.032057928354851453, 0.033805161837141787,
    0.035472213256882323, 0.037055128540240151, 0.038550153178615591, 0.03995374113272035,
    0.041262563242623486, 0.042473515123653598, 0.043583724529323464, 0.044590558163756545,
    0.045491627927418114, 0.046284796581314375, 0.04696818281621, 0.047540165714830301,
    0.047999388596458317, 0.048344762234802954, 0.048575467441503456, 0.048690957009139751,
    0.048690957009139751, 0.048575467441503456, 0.048344762234802954, 0.047999388596458317,
    0.047540165714830301, 0.04696818281621, 0.046284796581314375, 0.045491627927418114,
    0.044590558163756545, 0.043583724529323464, 0.042473515123653598, 0.041262563242623486,
    0.03995374113272035, 0.038550153178615591, 0.037055128540240151, 0.035472213256882323,
    0.033805161837141787, 0.032057928354851453, 0.030234657072402495, 0.028339672614259702,
    0.026377469715054627, 0.024352702568710853, 0.022270173808383007, 0.020134823153530094,
    0.017951715775697302, 0.015726030476025082, 0.013463047896718231, 0.011168139460131466,
    0.008846759826364391, 0.0065044579689796543, 0.0041470332605629233, 0.0017832807216942152,
};

template <typename F>
double gauss_legendre(F&& f, double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a), acc = 0.0;
    for (int i = 0; i < 64; ++i) acc += kGL64Weights[i] * f(mid + half * kGL64Nodes[i]);
    return half * acc;
}

// integrate over [a,b] split at the interior points of `kinks` (unsorted ok)
template <typename F>
double gauss_legendre_piecewise(F&& f, double a, double b, std::vector<double> kinks) {
    kinks.push_back(a);
    kinks.push_back(b);
    std::sort(kinks.begin(), kinks.end());
    double acc = 0.0, lo = a;
    for (double k : kinks) {
        if (k <= lo || k > b) continue;
        acc += gauss_legendre(f, lo, std::min(k, b));
        lo = k;
    }
    if (lo < b) acc += gauss_legendre(f, lo, b);
    return acc;
}

} // namespace fluoro
