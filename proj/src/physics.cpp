#include "physics.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace hfm {

FlowParams FlowParams::fixed(double re, double pec) {
    FlowParams fp;
    fp.re = re;
    fp.pec = pec;
    fp.validate();
    return fp;
}

FlowParams FlowParams::trainable(double re_guess, double pec_guess) {
    FlowParams fp;
    fp.re = re_guess;
    fp.pec = pec_guess;
    fp.re_trainable = true;
    fp.pec_trainable = true;
    fp.validate();
    return fp;
}

void FlowParams::validate() const {
    if (!(re > 0.0) || std::isnan(re))
        throw_invalid("Reynolds number must be positive");
    if (!(pec > 0.0) || std::isnan(pec))
        throw_invalid("Peclet number must be positive");
    if (re_trainable && !std::isfinite(re))
        throw_invalid("trainable Reynolds number must be finite");
    if (pec_trainable && !std::isfinite(pec))
        throw_invalid("trainable Peclet number must be finite");
}

double peclet_from_prandtl(double re, double pr) {
    if (!(re > 0.0) || !(pr > 0.0))
        throw_invalid("Pec = Re*Pr requires positive Re and Pr");
    return re * pr;
}

double ResidualSet::max_abs() const {
    double m = std::max({std::abs(e1), std::abs(e2), std::abs(e3),
                         std::abs(e4), std::abs(e6)});
    if (has_e5()) m = std::max(m, std::abs(e5));
    return m;
}

ResidualSet residuals_2d(const FieldJet& jet, const FlowParams& fp) {
    if (jet.spatial_dim != 2)
        throw_invalid("residuals_2d requires a 2D jet");
    fp.validate();
    const double ire = fp.inv_re();
    const double ipec = fp.inv_pec();

    const auto& val = jet.value;
    const auto& d1 = jet.d1;
    const auto& d2 = jet.d2;
    const double u = val[kFieldU], v = val[kFieldV];

    ResidualSet r;
    r.spatial_dim = 2;
    r.e1 = d1[kFieldC][0] + u * d1[kFieldC][1] + v * d1[kFieldC][2] -
           ipec * (d2[kFieldC][0] + d2[kFieldC][1]);
    r.e2 = d1[kFieldD][0] + u * d1[kFieldD][1] + v * d1[kFieldD][2] -
           ipec * (d2[kFieldD][0] + d2[kFieldD][1]);
    r.e3 = d1[kFieldU][0] + u * d1[kFieldU][1] + v * d1[kFieldU][2] +
           d1[kFieldP][1] - ire * (d2[kFieldU][0] + d2[kFieldU][1]);
    r.e4 = d1[kFieldV][0] + u * d1[kFieldV][1] + v * d1[kFieldV][2] +
           d1[kFieldP][2] - ire * (d2[kFieldV][0] + d2[kFieldV][1]);
    r.e6 = d1[kFieldU][1] + d1[kFieldV][2];
    return r;
}

ResidualSet residuals_3d(const FieldJet& jet, const FlowParams& fp) {
    if (jet.spatial_dim != 3)
        throw_invalid("residuals_3d requires a 3D jet");
    fp.validate();
    const double ire = fp.inv_re();
    const double ipec = fp.inv_pec();

    const auto& val = jet.value;
    const auto& d1 = jet.d1;
    const auto& d2 = jet.d2;
    const double u = val[kFieldU], v = val[kFieldV], w = val[kFieldW];

    auto advect = [&](int f) {
        return d1[f][0] + u * d1[f][1] + v * d1[f][2] + w * d1[f][3];
    };
    auto laplace = [&](int f) { return d2[f][0] + d2[f][1] + d2[f][2]; };

    ResidualSet r;
    r.spatial_dim = 3;
    r.e1 = advect(kFieldC) - ipec * laplace(kFieldC);
    r.e2 = advect(kFieldD) - ipec * laplace(kFieldD);
    r.e3 = advect(kFieldU) + d1[kFieldP][1] - ire * laplace(kFieldU);
    r.e4 = advect(kFieldV) + d1[kFieldP][2] - ire * laplace(kFieldV);
    r.e5 = advect(kFieldW) + d1[kFieldP][3] - ire * laplace(kFieldW);
    r.e6 = d1[kFieldU][1] + d1[kFieldV][2] + d1[kFieldW][3];
    return r;
}

std::vector<double> auxiliary_complement(std::span<const double> c) {
    std::vector<double> d(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) d[i] = 1.0 - c[i];
    return d;
}

} // namespace hfm
