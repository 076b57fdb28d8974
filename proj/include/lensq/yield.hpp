#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lensq/constants.hpp"
#include "lensq/geometry.hpp"
#include "lensq/phase.hpp"

namespace lensq {

/// Flaring M dwarf observed through a lens.
struct FlareModel {
    double R_flare = 3.0e6;                       ///< emitting-region radius, m
    double T_flare = 1.0e4;                       ///< K
    double duration = 60.0;                       ///< s
    double R_dwarf = 0.2 * constants::R_sun;      ///< m
    double T_dwarf = 3060.0;                      ///< K
    double D_S = 8.0 * constants::kiloparsec;     ///< m
    double rate_amplitude = 3.0;                  ///< flares per day above 1e30 erg
    double rate_index = 0.65;

    void validate() const {
        for (double v : {R_flare, T_flare, duration, R_dwarf, T_dwarf, D_S, rate_amplitude, rate_index})
            if (!(v > 0.0)) throw std::invalid_argument("flare model: all parameters must be positive");
    }
};

struct TelescopeSpec {
    double area = 1.0;            ///< collecting area, m^2
    double lambda_min = 365e-9;   ///< m
    double lambda_max = 510e-9;   ///< m

    void validate() const {
        if (!(area > 0.0)) throw std::invalid_argument("telescope: area must be positive");
        if (!(lambda_min > 0.0 && lambda_min < lambda_max))
            throw std::invalid_argument("telescope: need 0 < lambda_min < lambda_max");
    }
};

/// Optical depth versus wavelength, possibly the sum of several tabulated
/// components. Each component is interpolated linearly in ln(wavelength).
class ExtinctionCurve {
public:
    struct Table {
        std::vector<double> wavelength_nm;
        std::vector<double> tau;
    };

    ExtinctionCurve() = default;

    static ExtinctionCurve from_table(std::vector<double> wavelength_nm, std::vector<double> tau) {
        if (wavelength_nm.size() != tau.size() || wavelength_nm.size() < 2)
            throw std::invalid_argument("extinction table: need at least two (wavelength, tau) rows");
        for (std::size_t i = 0; i < tau.size(); ++i) {
            if (!(tau[i] >= 0.0)) throw std::invalid_argument("extinction table: tau must be >= 0");
            if (!(wavelength_nm[i] > 0.0)) throw std::invalid_argument("extinction table: wavelength must be > 0");
            if (i > 0 && !(wavelength_nm[i] > wavelength_nm[i - 1]))
                throw std::invalid_argument("extinction table: wavelengths must be strictly increasing");
        }
        ExtinctionCurve c;
        c.parts_.push_back({std::move(wavelength_nm), std::move(tau)});
        return c;
    }

    /// No extinction anywhere in [lo_nm, hi_nm].
    static ExtinctionCurve transparent(double lo_nm = 1.0, double hi_nm = 1.0e6) {
        return from_table({lo_nm, hi_nm}, {0.0, 0.0});
    }

    /// Two whitespace-separated columns (wavelength_nm, tau); '#' starts a comment line.
    static ExtinctionCurve load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open extinction table '" + path + "'");
        std::vector<double> w, t;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            std::istringstream ss(line);
            double a = 0.0, b = 0.0;
            if (!(ss >> a >> b))
                throw std::runtime_error("extinction table '" + path + "': malformed line " + std::to_string(lineno));
            w.push_back(a);
            t.push_back(b);
        }
        try {
            return from_table(std::move(w), std::move(t));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("extinction table '" + path + "': " + e.what());
        }
    }

    /// Sum of this curve and another; the domain shrinks to the overlap.
    ExtinctionCurve plus(const ExtinctionCurve& other) const {
        ExtinctionCurve c = *this;
        c.parts_.insert(c.parts_.end(), other.parts_.begin(), other.parts_.end());
        return c;
    }

    double min_wavelength_nm() const {
        double v = 0.0;
        for (const auto& p : parts_) v = std::max(v, p.wavelength_nm.front());
        return v;
    }
    double max_wavelength_nm() const {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& p : parts_) v = std::min(v, p.wavelength_nm.back());
        return v;
    }
    bool covers(double lo_nm, double hi_nm) const {
        return !parts_.empty() && lo_nm >= min_wavelength_nm() * (1 - 1e-12) && hi_nm <= max_wavelength_nm() * (1 + 1e-12);
    }

    double tau_at_wavelength(double nm) const {
        if (parts_.empty()) throw std::logic_error("extinction curve is empty");
        double total = 0.0;
        for (const auto& p : parts_) total += interpolate(p, nm);
        return total;
    }

    double tau_at_frequency(double hz) const { return tau_at_wavelength(constants::c / hz * 1e9); }

    /// Every tabulated wavelength of every component, sorted.
    std::vector<double> nodes_nm() const {
        std::vector<double> n;
        for (const auto& p : parts_) n.insert(n.end(), p.wavelength_nm.begin(), p.wavelength_nm.end());
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
        return n;
    }

    const std::vector<Table>& components() const { return parts_; }

private:
    static double interpolate(const Table& p, double nm) {
        const auto& w = p.wavelength_nm;
        if (nm < w.front() * (1 - 1e-12) || nm > w.back() * (1 + 1e-12))
            throw std::out_of_range("extinction curve: wavelength outside the table");
        auto it = std::upper_bound(w.begin(), w.end(), nm);
        std::size_t i = it == w.begin() ? 0 : static_cast<std::size_t>(it - w.begin()) - 1;
        if (i + 1 >= w.size()) i = w.size() - 2;
        const double s = std::clamp((std::log(nm) - std::log(w[i])) / (std::log(w[i + 1]) - std::log(w[i])), 0.0, 1.0);
        return p.tau[i] + s * (p.tau[i + 1] - p.tau[i]);
    }

    std::vector<Table> parts_;
};

enum class PhotonSource { signal, background };

/// Spectral photon rate per unit frequency of a blackbody, 2π f^2 / (exp(hf/kT) - 1).
inline double planck_photon_integrand(double f, double temperature) {
    using namespace constants;
    return two_pi * f * f / std::expm1(h * f / (k_B * temperature));
}

/// Integrates g(f) over [f_lo, f_hi], splitting at the given breakpoints.
template <class F>
double integrate_piecewise(F&& g, double f_lo, double f_hi, std::vector<double> breaks, double rel_tol = 1e-10) {
    using boost::math::quadrature::gauss_kronrod;
    breaks.push_back(f_lo);
    breaks.push_back(f_hi);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    double prev = f_lo;
    for (double b : breaks) {
        if (b <= prev || b > f_hi) continue;
        total += gauss_kronrod<double, 31>::integrate(g, prev, b, 20, rel_tol);
        prev = b;
    }
    return total;
}

/// Expected photons per flare from either the flare region or the quiescent dwarf.
inline double photons_per_flare(const FlareModel& model, const TelescopeSpec& tel, const ExtinctionCurve& ext,
                                PhotonSource which) {
    model.validate();
    tel.validate();
    using constants::c;
    const double lo_nm = tel.lambda_min * 1e9, hi_nm = tel.lambda_max * 1e9;
    if (!ext.covers(lo_nm, hi_nm)) throw std::out_of_range("photons_per_flare: passband outside extinction table");
    const double R = which == PhotonSource::signal ? model.R_flare : model.R_dwarf;
    const double temp = which == PhotonSource::signal ? model.T_flare : model.T_dwarf;
    const double f_lo = c / tel.lambda_max, f_hi = c / tel.lambda_min;
    std::vector<double> breaks;
    for (double nm : ext.nodes_nm())
        if (nm > lo_nm && nm < hi_nm) breaks.push_back(c / (nm * 1e-9));
    auto integrand = [&](double f) { return std::exp(-ext.tau_at_frequency(f)) * planck_photon_integrand(f, temp); };
    const double integral = integrate_piecewise(integrand, f_lo, f_hi, breaks);
    const double geom = R / (c * model.D_S);
    return tel.area * model.duration * geom * geom * integral;
}

struct TelescopeYield {
    double n_sig = 0.0;
    double n_bg = 0.0;
    double Q = 0.0;
};

inline TelescopeYield telescope_examples(double area, const FlareModel& model, const ExtinctionCurve& ext,
                                         TelescopeSpec band = {}) {
    if (!(area > 0.0)) throw std::invalid_argument("telescope_examples: area must be positive");
    band.area = 1.0;
    const double s = photons_per_flare(model, band, ext, PhotonSource::signal);
    const double b = photons_per_flare(model, band, ext, PhotonSource::background);
    return {s * area, b * area, s / (s + b)};
}

/// Cumulative flare rate above energy E (erg), per day.
inline double flare_rate(double E_erg, const FlareModel& model = {}) {
    if (!(E_erg > 0.0)) throw std::invalid_argument("flare_rate: energy must be positive");
    return model.rate_amplitude * std::pow(E_erg / 1e30, -model.rate_index);
}

inline bool flare_rate_in_validity_range(double E_erg) { return E_erg >= 1e29 && E_erg <= 1e32; }

/// Shortest usable wavelength once the finite-source bound is divided by the safety prefactor eps.
inline double passband_floor(const FlareModel& model, double A, double eps = 0.2) {
    if (!(eps > 0.0)) throw std::invalid_argument("passband_floor: eps must be positive");
    return finite_source_lambda_min({model.R_flare, model.D_S}, A) / eps;
}

/// Reference normalisation of the dispersion-measure structure function.
struct IsmReference {
    double tau0 = 1000.0 * constants::day;       ///< s
    double D_S0 = 1.0 * constants::kiloparsec;   ///< m
};

/// RMS interstellar phase over time lag tau for a source at D_S, optical frequency nu (Hz).
/// D_DM_ref is the structure function at the reference lag and distance, pc^2 cm^-6.
inline double ism_phase_sigma(double D_DM_ref, double tau, double D_S, double nu, IsmReference ref = {}) {
    if (!(D_DM_ref > 0.0 && tau > 0.0 && D_S > 0.0 && nu > 0.0))
        throw std::invalid_argument("ism_phase_sigma: inputs must be positive");
    // dispersion constant 2.41e-4 cm^-3 pc MHz^-2 s^-1; phase 2π nu_Hz * DM / (k nu_MHz^2)
    constexpr double k_disp = 2.41e-4;
    const double nu_mhz = nu * 1e-6;
    const double per_dm = two_pi * 1e6 / (k_disp * nu_mhz);
    return per_dm * std::sqrt(D_DM_ref) * std::pow(tau / ref.tau0, 5.0 / 6.0) * std::sqrt(D_S / ref.D_S0);
}

}  // namespace lensq
