#include "gcsge/integrator.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "gcsge/errors.hpp"

namespace gcsge {

void EvolutionConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!(dealias > 0.0 && dealias <= 1.0)) throw ConfigError("dealias must lie in (0, 1]");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be >= 0");
    if (output_stride == 0) throw ConfigError("output_stride must be >= 1");
    step_count();
}

std::size_t EvolutionConfig::step_count() const {
    const double ratio = t_end / dt;
    const double n = std::round(ratio);
    if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
        throw ConfigError(fmt::format("t_end = {} is not a multiple of dt = {}", t_end, dt));
    }
    return static_cast<std::size_t>(n);
}

GcsgeIntegrator::GcsgeIntegrator(const Grid& grid, RealField potential, EvolutionConfig cfg)
    : grid_(grid), V_(std::move(potential)), cfg_(cfg), fft_(grid.size()) {
    cfg_.validate();
    if (!(V_.grid == grid_)) throw ConfigError("potential grid does not match evolution grid");
    const std::size_t N = grid_.size();
    for (auto* b : {&ik_, &mk2_, &mask_, &e_half_, &e_full_, &phi_, &phix_, &phixx_, &work_, &nl_,
                    &k1_, &k2_, &k3_, &k4_, &stage_}) {
        b->assign(N, cplx{0.0, 0.0});
    }
    const double kcut = cfg_.dealias * grid_.k_max() * (1.0 + 1e-12);
    for (std::size_t n = 0; n < N; ++n) {
        const double k = grid_.wavenumber(n);
        ik_[n] = grid_.is_nyquist(n) ? cplx{0.0, 0.0} : cplx{0.0, k};
        mk2_[n] = -k * k;
        mask_[n] = std::abs(k) <= kcut ? 1.0 : 0.0;
        const double w = k * k + 1.0;
        e_half_[n] = std::polar(1.0, -w * 0.5 * cfg_.dt);
        e_full_[n] = std::polar(1.0, -w * cfg_.dt);
    }
}

void GcsgeIntegrator::nonlinear(const ComplexBuffer& u_hat, ComplexBuffer& out_hat, double t) {
    const auto exec = cfg_.exec;
    fft_.inverse(u_hat, phi_);
    kernels::multiply(exec, u_hat, ik_, work_);
    fft_.inverse(work_, phix_);
    kernels::multiply(exec, u_hat, mk2_, work_);
    fft_.inverse(work_, phixx_);
    const double smax = kernels::gcsge_nonlinear(exec, phi_, phix_, phixx_, V_.values, nl_);
    const double amax = std::sqrt(smax);
    if (!(amax < kSingularAmplitude)) {
        throw SingularStateError(
            fmt::format("max|phi| = {:.6g} reached the singular threshold at t = {:.6g}", amax, t),
            t, amax);
    }
    fft_.forward(nl_, out_hat);
    kernels::multiply(exec, out_hat, mask_, out_hat);
}

void GcsgeIntegrator::step_spectral(ComplexBuffer& u, double t) {
    const double h = cfg_.dt;
    const auto exec = cfg_.exec;
    // a = N(u)
    // b = N(E(u + h/2 a)),  c = N(E u + h/2 b),  d = N(E^2 u + h E c)
    nonlinear(u, k1_, t);
    kernels::axpy_multiply(exec, u, 0.5 * h, k1_, e_half_, stage_);
    nonlinear(stage_, k2_, t + 0.5 * h);
    kernels::multiply_add(exec, u, e_half_, 0.5 * h, k2_, stage_);
    nonlinear(stage_, k3_, t + 0.5 * h);
    kernels::multiply_add(exec, u, e_half_, h, k3_, stage_);
    kernels::multiply(exec, stage_, e_half_, stage_);
    nonlinear(stage_, k4_, t + h);
    kernels::rk4_combine(exec, u, k1_, k2_, k3_, k4_, e_half_, e_full_, h);
}

void GcsgeIntegrator::project(ComplexField& phi) {
    ComplexBuffer hat(grid_.size());
    fft_.forward(phi.values, hat);
    kernels::multiply(cfg_.exec, hat, mask_, hat);
    fft_.inverse(hat, phi.values);
}

ComplexField GcsgeIntegrator::rhs(const ComplexField& phi, double t) {
    ComplexBuffer hat(grid_.size()), nl_hat(grid_.size());
    fft_.forward(phi.values, hat);
    nonlinear(hat, nl_hat, t);
    for (std::size_t n = 0; n < hat.size(); ++n) {
        const double w = mk2_[n].real() - 1.0;  // -(k^2 + 1)
        nl_hat[n] += cplx{0.0, w} * hat[n];
    }
    ComplexField out(grid_);
    fft_.inverse(nl_hat, out.values);
    return out;
}

void GcsgeIntegrator::step(ComplexField& phi, double t) {
    ComplexBuffer hat(grid_.size());
    fft_.forward(phi.values, hat);
    step_spectral(hat, t);
    fft_.inverse(hat, phi.values);
}

EvolutionResult GcsgeIntegrator::evolve(const ComplexField& phi0, const Observer& observer) {
    if (!(phi0.grid == grid_)) throw ConfigError("initial field grid does not match evolution grid");
    const std::size_t steps = cfg_.step_count();
    EvolutionResult result;
    result.final_field = phi0;
    if (steps == 0) {
        result.diagnostics.push_back(diagnose(phi0, 0.0));
        if (observer) observer(0.0, phi0);
        return result;
    }

    ComplexField& phi = result.final_field;
    project(phi);
    ComplexBuffer u(grid_.size());
    fft_.forward(phi.values, u);

    auto record = [&](std::size_t n) {
        const double t = static_cast<double>(n) * cfg_.dt;
        fft_.inverse(u, phi.values);
        result.diagnostics.push_back(diagnose(phi, t));
        if (observer) observer(t, phi);
    };

    record(0);
    for (std::size_t n = 1; n <= steps; ++n) {
        step_spectral(u, static_cast<double>(n - 1) * cfg_.dt);
        if (n % cfg_.output_stride == 0 || n == steps) record(n);
    }
    return result;
}

ComplexField rhs(const ComplexField& phi, const RealField& V) {
    EvolutionConfig cfg;
    GcsgeIntegrator integ(phi.grid, V, cfg);
    return integ.rhs(phi);
}

ComplexField step(const ComplexField& phi, const RealField& V, double dt) {
    EvolutionConfig cfg;
    cfg.dt = dt;
    GcsgeIntegrator integ(phi.grid, V, cfg);
    ComplexField out = phi;
    integ.step(out);
    return out;
}

EvolutionResult evolve(const ComplexField& phi0, const RealField& V, const EvolutionConfig& cfg,
                       const Observer& observer) {
    GcsgeIntegrator integ(phi0.grid, V, cfg);
    return integ.evolve(phi0, observer);
}

namespace {

void check_amplitude(const ComplexField& phi) {
    const double a = max_abs(phi.span());
    if (!(a < kSingularAmplitude)) {
        throw SingularStateError(fmt::format("max|phi| = {:.6g} is singular", a), 0.0, a);
    }
}

}  // namespace

double noether_charge(const ComplexField& phi) {
    check_amplitude(phi);
    double s = 0.0;
    for (const auto& z : phi.values) {
        const double a2 = std::norm(z);
        s += a2 / (1.0 - a2);
    }
    return s * phi.grid.dx();
}

double total_momentum(const ComplexField& phi) {
    check_amplitude(phi);
    const ComplexField phix = spectral_derivative(phi, 1);
    double s = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) {
        s += (std::conj(phi[j]) * phix[j]).imag() / (1.0 - std::norm(phi[j]));
    }
    return s * phi.grid.dx();
}

Diagnostics diagnose(const ComplexField& phi, double t) {
    return {t, noether_charge(phi), total_momentum(phi), max_abs(phi.span())};
}

void write_diagnostics_csv(std::ostream& os, const std::vector<Diagnostics>& series) {
    os << "t,Q,P,max_amp\n";
    for (const auto& d : series) {
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", d.t, d.Q, d.P, d.max_amp);
    }
}

}  // namespace gcsge
