#include "ebm/model.hpp"

namespace ebm {

Rates vector_field(const ModelParams& p, const State& s) {
    const double qa = signed_quartic(s.t_a);
    const double qs = signed_quartic(s.t_s);
    const double es = p.epsilon_a * p.sigma_b;

    double fa = -p.lambda * (s.t_a - s.t_s) + es * qs - 2.0 * es * qa;
    if (p.coalbedo_a) fa += p.q * p.coalbedo_a->value(s.t_a);

    double fs = -p.lambda * (s.t_s - s.t_a) - p.sigma_b * qs + es * qa +
                p.q * p.coalbedo_s.value(s.t_s);

    return {fa / p.gamma_a, fs / p.gamma_s};
}

Jacobian2 jacobian(const ModelParams& p, const State& s) {
    const SlopeResult bs = p.coalbedo_s.slope(s.t_s);
    if (bs.kink)
        raise(ErrorCode::KinkPoint, "beta_s slope undefined at T_s = ramp corner");

    double beta_a_slope = 0.0;
    if (p.coalbedo_a) {
        const SlopeResult ba = p.coalbedo_a->slope(s.t_a);
        if (ba.kink)
            raise(ErrorCode::KinkPoint, "beta_a slope undefined at T_a = ramp corner");
        beta_a_slope = ba.left;
    }

    const double da = signed_quartic_deriv(s.t_a); // 4|T_a|^3
    const double ds = signed_quartic_deriv(s.t_s); // 4|T_s|^3
    const double es = p.epsilon_a * p.sigma_b;

    Jacobian2 j;
    j.a11 = (-p.lambda - 2.0 * es * da + p.q * beta_a_slope) / p.gamma_a;
    j.a12 = (p.lambda + es * ds) / p.gamma_a;
    j.a21 = (p.lambda + es * da) / p.gamma_s;
    j.a22 = (-p.lambda - p.sigma_b * ds + p.q * bs.left) / p.gamma_s;
    return j;
}

} // namespace ebm
