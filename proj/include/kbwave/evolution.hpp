#ifndef KBWAVE_EVOLUTION_HPP
#define KBWAVE_EVOLUTION_HPP

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <fftw3.h>

#include "kbwave/error.hpp"

namespace kbwave {

/// Fields on the periodic grid x_j = x_begin + j L / n.
struct EvolutionState {
    double L = 0.0;
    double x_begin = 0.0;
    std::vector<double> u;
    std::vector<double> v;
    double t = 0.0;

    std::size_t n() const noexcept { return u.size(); }
    double dx() const noexcept { return L / double(u.size()); }
    double x(std::size_t j) const noexcept { return x_begin + double(j) * dx(); }

    void validate() const
    {
        const std::size_t m = u.size();
        if (m < 4 || (m & (m - 1)) != 0) throw Error(ErrorKind::invalid_argument, "n must be a power of two >= 4");
        if (v.size() != m) throw Error(ErrorKind::invalid_argument, "u and v differ in length");
        if (!(L > 0.0)) throw Error(ErrorKind::invalid_argument, "L must be positive");
        for (std::size_t j = 0; j < m; ++j)
            if (!std::isfinite(u[j]) || !std::isfinite(v[j]))
                throw Error(ErrorKind::invalid_argument, "non-finite field value");
    }
};

namespace detail {

// FFTW's planner is not reentrant.
inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace detail

/// Pseudo-spectral right-hand side with 2/3-rule dealiasing:
///   u_t = d/dx (3/4 u^2 + v)
///   v_t = -1/4 u_xxx + v u_x + 1/2 u v_x
class SpectralKB {
public:
    SpectralKB(std::size_t n, double L) : n_(n), L_(L), nc_(n / 2 + 1)
    {
        if (n < 4 || (n & (n - 1)) != 0) throw Error(ErrorKind::invalid_argument, "n must be a power of two >= 4");
        real_ = fftw_alloc_real(n_);
        spec_ = fftw_alloc_complex(nc_);
        {
            std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
            fwd_ = fftw_plan_dft_r2c_1d(int(n_), real_, spec_, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r_1d(int(n_), spec_, real_, FFTW_ESTIMATE);
        }
        k_.resize(nc_);
        const std::size_t cut = n_ / 3;
        keep_.resize(nc_);
        for (std::size_t m = 0; m < nc_; ++m) {
            k_[m] = 2.0 * std::numbers::pi / L_ * double(m);
            keep_[m] = m <= cut;
        }
        hu_.resize(nc_);
        hv_.resize(nc_);
        w_.resize(nc_);
    }

    SpectralKB(const SpectralKB&) = delete;
    SpectralKB& operator=(const SpectralKB&) = delete;

    ~SpectralKB()
    {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    std::size_t n() const noexcept { return n_; }
    double L() const noexcept { return L_; }

    /// Spectral derivative of order `order`, no dealiasing.
    std::vector<double> derivative(const std::vector<double>& f, int order)
    {
        forward(f, w_);
        for (std::size_t m = 0; m < nc_; ++m) {
            std::complex<double> ik(0.0, k_[m]);
            std::complex<double> fac = std::pow(ik, order);
            if ((order % 2) != 0 && m == n_ / 2) fac = 0.0;
            w_[m] *= fac;
        }
        std::vector<double> out(n_);
        backward(w_, out);
        return out;
    }

    void rhs(const std::vector<double>& u, const std::vector<double>& v, std::vector<double>& du,
             std::vector<double>& dv)
    {
        forward(u, hu_);
        forward(v, hv_);
        for (std::size_t m = 0; m < nc_; ++m)
            if (!keep_[m]) hu_[m] = hv_[m] = 0.0;

        std::vector<double> uf(n_), vf(n_), ux(n_), vx(n_), uxxx(n_);
        backward(hu_, uf);
        backward(hv_, vf);
        w_ = hu_;
        apply_ik(w_, 1);
        backward(w_, ux);
        w_ = hv_;
        apply_ik(w_, 1);
        backward(w_, vx);
        w_ = hu_;
        apply_ik(w_, 3);
        backward(w_, uxxx);

        std::vector<double> flux(n_), src(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            flux[j] = 0.75 * uf[j] * uf[j] + vf[j];
            src[j] = vf[j] * ux[j] + 0.5 * uf[j] * vx[j];
        }
        du.resize(n_);
        dv.resize(n_);
        forward(flux, w_);
        for (std::size_t m = 0; m < nc_; ++m)
            if (!keep_[m]) w_[m] = 0.0;
        apply_ik(w_, 1);
        backward(w_, du);

        forward(src, w_);
        for (std::size_t m = 0; m < nc_; ++m)
            if (!keep_[m]) w_[m] = 0.0;
        backward(w_, dv);
        for (std::size_t j = 0; j < n_; ++j) dv[j] -= 0.25 * uxxx[j];
    }

private:
    using cvec = std::vector<std::complex<double>>;

    void forward(const std::vector<double>& f, cvec& out)
    {
        std::copy(f.begin(), f.end(), real_);
        fftw_execute(fwd_);
        out.resize(nc_);
        for (std::size_t m = 0; m < nc_; ++m) out[m] = {spec_[m][0], spec_[m][1]};
    }

    void backward(const cvec& in, std::vector<double>& out)
    {
        for (std::size_t m = 0; m < nc_; ++m) {
            spec_[m][0] = in[m].real();
            spec_[m][1] = in[m].imag();
        }
        fftw_execute(bwd_); // c2r overwrites its input, which is our scratch
        out.resize(n_);
        const double s = 1.0 / double(n_);
        for (std::size_t j = 0; j < n_; ++j) out[j] = real_[j] * s;
    }

    void apply_ik(cvec& w, int order) const
    {
        for (std::size_t m = 0; m < nc_; ++m) {
            const std::complex<double> fac = std::pow(std::complex<double>(0.0, k_[m]), order);
            w[m] = (order % 2 != 0 && m == n_ / 2) ? 0.0 : w[m] * fac;
        }
    }

    std::size_t n_;
    double L_;
    std::size_t nc_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
    std::vector<double> k_;
    std::vector<bool> keep_;
    cvec hu_, hv_, w_;
};

struct StateRate {
    std::vector<double> du_dt;
    std::vector<double> dv_dt;
};

inline StateRate kb_rhs(const EvolutionState& s)
{
    s.validate();
    SpectralKB op(s.n(), s.L);
    StateRate r;
    op.rhs(s.u, s.v, r.du_dt, r.dv_dt);
    return r;
}

struct EvolveSettings {
    /// Step bound |dt| <= cfl_constant * dx^3.
    double cfl_constant = 1.0;
};

/// Classic RK4 for round(T/|dt|) steps; a negative dt runs backward in time.
inline EvolutionState evolve(const EvolutionState& s0, double dt, double T, const EvolveSettings& cfg = {})
{
    s0.validate();
    if (!(dt != 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::invalid_argument, "dt must be nonzero");
    if (!(T >= 0.0)) throw Error(ErrorKind::invalid_argument, "T must be nonnegative");
    const double dx = s0.dx();
    if (std::abs(dt) > cfg.cfl_constant * dx * dx * dx)
        throw Error(ErrorKind::invalid_argument, "dt exceeds the dispersive step bound C dx^3 = " +
                                                     std::to_string(cfg.cfl_constant * dx * dx * dx));
    const auto steps = static_cast<long long>(std::llround(T / std::abs(dt)));
    SpectralKB op(s0.n(), s0.L);
    EvolutionState s = s0;
    const std::size_t n = s.n();
    std::vector<double> k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v, tu(n), tv(n);
    for (long long step = 0; step < steps; ++step) {
        op.rhs(s.u, s.v, k1u, k1v);
        for (std::size_t j = 0; j < n; ++j) tu[j] = s.u[j] + 0.5 * dt * k1u[j], tv[j] = s.v[j] + 0.5 * dt * k1v[j];
        op.rhs(tu, tv, k2u, k2v);
        for (std::size_t j = 0; j < n; ++j) tu[j] = s.u[j] + 0.5 * dt * k2u[j], tv[j] = s.v[j] + 0.5 * dt * k2v[j];
        op.rhs(tu, tv, k3u, k3v);
        for (std::size_t j = 0; j < n; ++j) tu[j] = s.u[j] + dt * k3u[j], tv[j] = s.v[j] + dt * k3v[j];
        op.rhs(tu, tv, k4u, k4v);
        bool finite = true;
        for (std::size_t j = 0; j < n; ++j) {
            s.u[j] += dt / 6.0 * (k1u[j] + 2.0 * k2u[j] + 2.0 * k3u[j] + k4u[j]);
            s.v[j] += dt / 6.0 * (k1v[j] + 2.0 * k2v[j] + 2.0 * k3v[j] + k4v[j]);
            finite = finite && std::isfinite(s.u[j]) && std::isfinite(s.v[j]);
        }
        s.t = s0.t + double(step + 1) * dt;
        if (!finite) throw Error(ErrorKind::blow_up, "at t = " + std::to_string(s.t));
    }
    return s;
}

/// Linearized growth rates lambda = i k eig([[3u0/2, 1], [k^2/4 + v0, u0/2]])
/// about the constant state (u0, v0) for wavenumber k.
inline std::array<std::complex<double>, 2> linear_dispersion(double u0, double v0, double k)
{
    const double tr = 2.0 * u0;
    const double det = 0.75 * u0 * u0 - (0.25 * k * k + v0);
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
    const std::complex<double> ik(0.0, k);
    return {ik * (0.5 * (tr + disc)), ik * (0.5 * (tr - disc))};
}

} // namespace kbwave

#endif
