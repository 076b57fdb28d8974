// Command-line front end for the lensq simulation and estimation toolkit.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lensq/harness/experiments.hpp"
#include "lensq/lensq.hpp"

namespace fs = std::filesystem;
using namespace lensq;
using namespace lensq::harness;

namespace {

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
    std::string config_path;
    std::optional<double> omega0, tc, window, A, Q, delta_fs, confidence;
};

ExperimentConfig resolve_config(const GlobalFlags& g, ExperimentConfig base) {
    if (!g.config_path.empty()) base = ExperimentConfig::from_json(read_json_file(g.config_path), base);
    if (g.seed) base.seed = *g.seed;
    if (g.trials) base.trials = *g.trials;
    if (g.threads) base.threads = *g.threads;
    if (g.out) base.out = *g.out;
    if (g.omega0) base.packet.omega0 = *g.omega0;
    if (g.tc) base.packet.tc = *g.tc;
    if (g.window) base.packet.T = *g.window;
    if (g.A) base.A = *g.A;
    if (g.Q) base.Q = *g.Q;
    if (g.delta_fs) base.delta_fs = *g.delta_fs;
    if (g.confidence) base.confidence = *g.confidence;
    base.validate();
    fs::create_directories(base.out);
    return base;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) { return (fs::path(cfg.out) / name).string(); }

void finish(const ExperimentConfig& cfg, const std::string& name, const Report& report) {
    const std::string path = out_path(cfg, name);
    write_report(path, report);
    std::cout << report.dump(2) << '\n';
}

/// Report header named after the subcommand that produced it.
Report start_report(const ExperimentConfig& cfg, const std::string& command) {
    Report r = make_report(cfg);
    r["experiment"] = command;
    return r;
}

void add_packet_report(Report& r, const ExperimentConfig& cfg) {
    r["omega0"] = cfg.packet.omega0;
    r["tc"] = cfg.packet.tc;
    r["T"] = cfg.packet.T;
    r["A"] = cfg.A;
    r["Q"] = cfg.Q;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
    std::size_t photons = 1000;
    std::optional<double> delta_t;
    std::size_t bins = 400;
};

void cmd_simulate(const ExperimentConfig& cfg, const SimulateArgs& a) {
    RngStream rng(cfg.seed, 0, 0);
    const double dt = a.delta_t ? *a.delta_t : draw_admissible_delay(cfg.packet, rng);
    LensSignalSpec lens{dt, cfg.A, cfg.delta_fs, cfg.Q};
    const auto photons = sample_photons(a.photons, cfg.packet, lens, rng);

    CsvWriter pw(out_path(cfg, "photons.csv"), {"index", "detuning", "origin"});
    for (std::size_t i = 0; i < photons.size(); ++i)
        pw.row({static_cast<long long>(i), photons[i].detuning, std::string(to_string(photons[i].origin))});

    // Histogram over a window a few fringes wide, so the modulation is resolved.
    const double fringe = two_pi / dt;
    const double half = std::min(3.0 / cfg.packet.tc, 10.0 * fringe);
    const double width = 2.0 * half / static_cast<double>(a.bins);
    std::vector<std::size_t> counts(a.bins, 0);
    for (const auto& p : photons) {
        const double x = (p.detuning + half) / width;
        if (x >= 0.0 && x < static_cast<double>(a.bins)) ++counts[static_cast<std::size_t>(x)];
    }
    CsvWriter sw(out_path(cfg, "fringe_spectrum.csv"), {"detuning", "pdf", "envelope", "empirical"});
    for (std::size_t b = 0; b < a.bins; ++b) {
        const double d = -half + (static_cast<double>(b) + 0.5) * width;
        const double pdf = cfg.Q * channel_pdf_detuned(d, cfg.packet, lens) +
                           (1.0 - cfg.Q) * envelope_density(d, cfg.packet);
        sw.row({d, pdf, envelope_density(d, cfg.packet),
                static_cast<double>(counts[b]) / (static_cast<double>(photons.size()) * width)});
    }

    Report r = start_report(cfg, "simulate");
    add_packet_report(r, cfg);
    r["delta_t"] = dt;
    r["photons"] = photons.size();
    r["photons_csv"] = out_path(cfg, "photons.csv");
    r["spectrum_csv"] = out_path(cfg, "fringe_spectrum.csv");
    finish(cfg, "simulate.json", r);
}

// --- estimate --------------------------------------------------------------

void cmd_estimate(const ExperimentConfig& cfg, const std::string& input) {
    const CsvTable t = read_csv(input);
    const std::size_t col = t.column("detuning");
    std::vector<PhotonSample> photons;
    photons.reserve(t.rows.size());
    for (const auto& row : t.rows) photons.push_back({std::stod(row[col]), PhotonOrigin::signal});
    const auto est = estimate_alg1(photons, cfg.packet, cfg.Q, cfg.A, true);
    const CandidateGrid grid = build_grid(cfg.packet);

    CsvWriter w(out_path(cfg, "score_trace.csv"), {"tau", "score"});
    for (std::size_t i = 0; i < est.scores->size(); ++i) w.row({grid.tau(i), (*est.scores)[i]});

    Report r = start_report(cfg, "estimate");
    add_packet_report(r, cfg);
    r["input"] = input;
    r["photons"] = photons.size();
    r["tau_hat"] = est.tau_hat;
    r["peak_score"] = est.peak_score;
    r["threshold"] = est.threshold;
    r["detected"] = est.detected;
    finish(cfg, "estimate.json", r);
}

// --- curve -----------------------------------------------------------------

void cmd_curve(ExperimentConfig cfg, const std::string& algorithm) {
    Report r = make_report(cfg);
    add_packet_report(r, cfg);
    r["trials_per_point"] = cfg.trials;
    auto crossings = [&](const ConfidenceCurve& c, const std::string& prefix) {
        for (double level : {0.5, cfg.confidence}) {
            const auto x = c.crossing(level);
            const std::string key = prefix + "n_sig_at_" + format_number(level);
            if (x) r[key] = *x;
            else r[key] = nullptr;
        }
    };
    if (algorithm == "both") {
        cfg.kind = ExperimentKind::alg2_compare;
        r = make_report(cfg);
        add_packet_report(r, cfg);
        const auto rows = run_alg2_compare(cfg);
        ConfidenceCurve a, b;
        bool all_overlap = true;
        CsvWriter w(out_path(cfg, "alg2_compare.csv"),
                    {"n_sig", "alg1_rate", "alg1_ci_low", "alg1_ci_high", "alg2_rate", "alg2_ci_low", "alg2_ci_high",
                     "overlap", "trials"});
        for (const auto& row : rows) {
            a.rows.push_back(row.alg1);
            b.rows.push_back(row.alg2);
            all_overlap = all_overlap && row.overlap;
            w.row({row.alg1.n_sig, row.alg1.rate, row.alg1.ci.low, row.alg1.ci.high, row.alg2.rate, row.alg2.ci.low,
                   row.alg2.ci.high, static_cast<long long>(row.overlap), static_cast<long long>(row.alg1.trials)});
        }
        write_confidence_csv(out_path(cfg, "confidence_curve_alg1.csv"), a);
        write_confidence_csv(out_path(cfg, "confidence_curve_alg2.csv"), b);
        crossings(a, "alg1_");
        crossings(b, "alg2_");
        r["all_intervals_overlap"] = all_overlap;
        finish(cfg, "alg2_compare.json", r);
        return;
    }
    const Algorithm alg = algorithm == "alg2" ? Algorithm::alg2 : Algorithm::alg1;
    const auto curve = run_confidence_curve(cfg, alg);
    write_confidence_csv(out_path(cfg, "confidence_curve.csv"), curve);
    r["algorithm"] = algorithm;
    crossings(curve, "");
    finish(cfg, "confidence_curve.json", r);
}

// --- flares / demo ---------------------------------------------------------

void cmd_flares(ExperimentConfig cfg) {
    cfg.kind = ExperimentKind::flares_needed;
    const auto rows = run_flares_needed(cfg);
    write_flares_csv(out_path(cfg, "flares_needed.csv"), rows);
    Report r = make_report(cfg);
    add_packet_report(r, cfg);
    r["trials_per_point"] = cfg.trials;
    r["confidence"] = cfg.confidence;
    std::size_t violations = 0;
    for (const auto& row : rows)
        if (row.m_required && *row.m_required > row.bound_m) ++violations;
    r["points"] = rows.size();
    r["points_above_bound"] = violations;
    finish(cfg, "flares_needed.json", r);
}

void cmd_demo(const GlobalFlags& g, std::size_t seeds) {
    ExperimentConfig cfg = resolve_config(g, demo_config());
    cfg.kind = ExperimentKind::single_demo;
    const DemoResult d = run_single_demo(cfg, 0);
    CsvWriter w(out_path(cfg, "score_trace.csv"), {"tau", "score"});
    for (std::size_t i = 0; i < d.tau.size(); ++i) w.row({d.tau[i], d.score[i]});
    Report r = make_report(cfg);
    add_packet_report(r, cfg);
    r["Q"] = cfg.flares.Q();
    r["flares"] = cfg.flares.flares;
    r["n_sig_per_flare"] = cfg.flares.n_sig;
    r["n_bg_per_flare"] = cfg.flares.n_bg;
    r["mean_delay"] = d.mean_delay;
    r["peak_tau"] = d.peak_tau;
    r["peak_score"] = d.peak_score;
    r["threshold"] = d.threshold;
    r["detected"] = d.detected;
    r["peak_within_tc"] = d.within_tc;
    if (seeds > 0) {
        r["seeds"] = seeds;
        r["peak_within_tc_rate"] = demo_peak_rate(cfg, seeds);
    }
    finish(cfg, "demo.json", r);
}

// --- yield -----------------------------------------------------------------

struct YieldArgs {
    double area = 1.0;
    double lambda_min_nm = 365.0, lambda_max_nm = 510.0;
    std::vector<std::string> extinction;
    bool no_extinction = false;
    FlareModel model{};
    double D_S_kpc = 8.0;
    double dm_ref = 1e-6;
    double ism_lag = 60.0;
    double ism_nu = 7.5e14;
    std::size_t integrand_points = 200;
};

void cmd_yield(const ExperimentConfig& cfg, YieldArgs a) {
    a.model.D_S = a.D_S_kpc * constants::kiloparsec;
    ExtinctionCurve ext;
    if (a.no_extinction) {
        ext = ExtinctionCurve::transparent();
    } else {
        if (a.extinction.empty())
            a.extinction = {std::string(LENSQ_DATA_DIR) + "/extinction_dust_bulge.txt",
                            std::string(LENSQ_DATA_DIR) + "/extinction_atmosphere.txt"};
        ext = ExtinctionCurve::load(a.extinction.front());
        for (std::size_t i = 1; i < a.extinction.size(); ++i) ext = ext.plus(ExtinctionCurve::load(a.extinction[i]));
    }
    TelescopeSpec band{1.0, a.lambda_min_nm * 1e-9, a.lambda_max_nm * 1e-9};
    const TelescopeYield y = telescope_examples(a.area, a.model, ext, band);

    CsvWriter w(out_path(cfg, "yield_integrand.csv"),
                {"wavelength_nm", "frequency_hz", "tau", "signal_integrand", "background_integrand"});
    for (std::size_t i = 0; i < a.integrand_points; ++i) {
        const double nm = a.lambda_min_nm + (a.lambda_max_nm - a.lambda_min_nm) * static_cast<double>(i) /
                                                static_cast<double>(a.integrand_points - 1);
        const double f = constants::c / (nm * 1e-9);
        const double tau = ext.tau_at_wavelength(nm);
        w.row({nm, f, tau, std::exp(-tau) * planck_photon_integrand(f, a.model.T_flare),
               std::exp(-tau) * planck_photon_integrand(f, a.model.T_dwarf)});
    }

    Report r = start_report(cfg, "yield");
    r["area_m2"] = a.area;
    r["lambda_min_nm"] = a.lambda_min_nm;
    r["lambda_max_nm"] = a.lambda_max_nm;
    r["n_sig"] = y.n_sig;
    r["n_bg"] = y.n_bg;
    r["Q"] = y.Q;
    r["n_sig_per_m2"] = y.n_sig / a.area;
    r["n_bg_per_m2"] = y.n_bg / a.area;
    r["passband_floor_nm"] = passband_floor(a.model, cfg.A) * 1e9;
    r["ism_sigma_phi"] = ism_phase_sigma(a.dm_ref, a.ism_lag, a.model.D_S, a.ism_nu);
    r["integrand_csv"] = out_path(cfg, "yield_integrand.csv");
    finish(cfg, "yield.json", r);
}

// --- dust ------------------------------------------------------------------

void cmd_dust(ExperimentConfig cfg, std::optional<double> rho, std::optional<double> ratio, std::optional<int> dims) {
    cfg.kind = ExperimentKind::dust_sweep;
    if (rho) cfg.dust.rho_N = *rho;
    if (ratio) cfg.dust.d = *ratio * cfg.dust.r;
    if (dims) cfg.dust.dims = *dims;
    const DustSummary s = run_dust_sweep(cfg);
    CsvWriter w(out_path(cfg, "dust.csv"), {"trial", "fraction"});
    for (std::size_t i = 0; i < s.fractions.size(); ++i) w.row({static_cast<long long>(i), s.fractions[i]});
    Report r = make_report(cfg);
    r["d_over_r"] = cfg.dust.ratio();
    r["rho_N"] = cfg.dust.rho_N;
    r["dims"] = cfg.dust.dims;
    r["trials"] = s.trials;
    r["mean_unblocked"] = s.mean;
    r["expected_unblocked"] = s.expected;
    r["standard_error"] = s.standard_error;
    r["variance"] = s.variance;
    r["variance_bound"] = s.bound;
    finish(cfg, "dust.json", r);
}

// --- capacity --------------------------------------------------------------

void cmd_capacity(ExperimentConfig cfg, bool full_fringe) {
    cfg.kind = ExperimentKind::capacity;
    if (full_fringe) cfg.A = std::numeric_limits<double>::infinity();
    const CapacityReport c = run_capacity(cfg);
    Report r = make_report(cfg);
    r["omega0_tc"] = cfg.packet.omega0 * cfg.packet.tc;
    r["T_over_tc"] = cfg.packet.window_ratio();
    r["visibility"] = gamma_factor(cfg.A);
    r["chi_nats"] = c.result.chi;
    r["chi_refined_nats"] = c.result.chi_refined;
    r["S_left"] = c.result.S_left;
    r["S_right"] = c.result.S_right;
    r["large_window_chi"] = capacity_large_window(gamma_factor(cfg.A));
    r["photon_floor"] = c.photon_floor;
    finish(cfg, "capacity.json", r);
}

// --- array -----------------------------------------------------------------

void cmd_array(ExperimentConfig cfg, std::size_t sites, std::size_t photons) {
    cfg.kind = ExperimentKind::array_demo;
    cfg.array_sites = sites;
    cfg.array_photons = photons;
    cfg.validate();
    RngStream rng = trial_stream(cfg, 0, 0);
    const ArraySpec arr = draw_array(cfg.array_sites, cfg.packet, rng);
    const std::size_t budget = array_budget(cfg);
    const auto samples = sample_array_photons(budget, arr, cfg.packet, rng);
    const auto est = estimate_pairwise_delays(samples, cfg.packet, arr.N(), true);
    const CandidateGrid grid = build_grid(cfg.packet);

    CsvWriter w(out_path(cfg, "array_scores.csv"), {"tau", "score"});
    for (std::size_t i = 0; i < est.scores->size(); ++i) w.row({grid.tau(i), (*est.scores)[i]});

    Report r = make_report(cfg);
    add_packet_report(r, cfg);
    r["sites"] = arr.N();
    r["photons"] = budget;
    for (std::size_t i = 1; i < arr.N(); ++i) r["site_delay_" + std::to_string(i)] = arr.delays[i];
    for (std::size_t i = 0; i < est.peaks.size(); ++i) {
        const std::string k = "peak_" + std::to_string(i);
        r[k + "_tau"] = est.peaks[i].tau;
        r[k + "_score"] = est.peaks[i].score;
        r[k + "_multiplicity"] = est.peaks[i].multiplicity;
        r[k + "_detected"] = est.peaks[i].detected;
    }
    r["threshold"] = est.threshold;
    r["complete"] = est.complete;
    r["all_pairs_within_tc"] = pairs_recovered(arr, est, cfg.packet.tc);
    if (!est.warning.empty()) r["warning"] = est.warning;
    if (cfg.trials > 1) {
        const auto demo = run_array_demo(cfg);
        r["trials"] = demo.trials;
        r["recovery_rate"] = demo.rate();
    }
    finish(cfg, "array.json", r);
}

// --- geometry --------------------------------------------------------------

struct GeometryArgs {
    double mass_solar = constants::M_jup / constants::M_sun;
    double D_L_kpc = 4.0, D_S_kpc = 8.0, v_T_kms = 55.0, u = 1.0;
    double source_radius = constants::R_sun;
    double u_min = 0.05, u_max = 3.0;
    std::size_t points = 120;
};

void cmd_geometry(const ExperimentConfig& cfg, const GeometryArgs& a) {
    LensGeometry g;
    g.M = a.mass_solar * constants::M_sun;
    g.D_L = a.D_L_kpc * constants::kiloparsec;
    g.D_S = a.D_S_kpc * constants::kiloparsec;
    g.v_T = a.v_T_kms * 1e3;
    g.u = a.u;
    g.validate();
    const Magnification m = magnification(a.u);

    CsvWriter w(out_path(cfg, "fu_Au.csv"), {"u", "f_u", "A_u"});
    for (std::size_t i = 0; i < a.points; ++i) {
        const double u = a.u_min + (a.u_max - a.u_min) * static_cast<double>(i) / static_cast<double>(a.points - 1);
        w.row({u, delay_factor(u), magnification(u).A});
    }

    Report r = start_report(cfg, "geometry");
    r["mass_kg"] = g.M;
    r["u"] = a.u;
    r["einstein_radius_rad"] = einstein_radius(g);
    r["crossing_time_days"] = crossing_time(g) / constants::day;
    r["A"] = m.A;
    r["A_plus"] = m.plus;
    r["A_minus"] = m.minus;
    r["gamma"] = gamma_factor(m.A);
    r["f_u"] = delay_factor(a.u);
    r["delay_s"] = time_delay(g.M, a.u);
    r["finite_source_lambda_min_m"] = finite_source_lambda_min({a.source_radius, g.D_S}, m.A);
    r["fu_Au_csv"] = out_path(cfg, "fu_Au.csv");
    finish(cfg, "geometry.json", r);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lensq: photon-level lensing time-delay simulation and estimation"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--seed", g.seed, "Master random seed");
    app.add_option("--trials", g.trials, "Monte Carlo trials per point");
    app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--omega0", g.omega0, "Carrier angular frequency, rad/s");
    app.add_option("--tc", g.tc, "Coherence time, s");
    app.add_option("--window", g.window, "Delay search window T, s");
    app.add_option("--A", g.A, "Total magnification (inf for a fully modulated fringe)");
    app.add_option("--Q", g.Q, "Signal fraction");
    app.add_option("--delta-fs", g.delta_fs, "Finite-source delay spread, s");
    app.add_option("--confidence", g.confidence, "Target success rate");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Draw photons for one lens and write the spectrum");
    simulate->add_option("--photons", sim.photons, "Number of photons")->check(CLI::PositiveNumber);
    simulate->add_option("--delta-t", sim.delta_t, "True delay, s (random if omitted)");
    simulate->add_option("--bins", sim.bins, "Spectrum histogram bins")->check(CLI::PositiveNumber);

    std::string estimate_in;
    auto* estimate = app.add_subcommand("estimate", "Run the frequency-basis estimator on a photon CSV");
    estimate->add_option("--in", estimate_in, "Photon CSV with a 'detuning' column")->required()->check(CLI::ExistingFile);

    std::string curve_alg = "alg1";
    std::vector<double> curve_points;
    auto* curve = app.add_subcommand("curve", "Success rate against signal photon count");
    curve->add_option("--algorithm", curve_alg, "alg1, alg2 or both")->check(CLI::IsMember({"alg1", "alg2", "both"}));
    curve->add_option("--n-sig", curve_points, "Signal photon counts to sweep");

    std::vector<double> flare_points;
    auto* flares = app.add_subcommand("flares", "Flares needed for a detection against photons per flare");
    flares->add_option("--n-sig", flare_points, "Signal photons per flare to sweep");

    std::size_t demo_seeds = 0;
    auto* demo = app.add_subcommand("demo", "Five-flare combined score trace");
    demo->add_option("--seeds", demo_seeds, "Also report the peak location rate over this many seeds");

    YieldArgs ya;
    auto* yield = app.add_subcommand("yield", "Photon yields per flare and the interstellar phase noise");
    yield->add_option("--area", ya.area, "Collecting area, m^2")->check(CLI::PositiveNumber);
    yield->add_option("--lambda-min", ya.lambda_min_nm, "Passband lower edge, nm");
    yield->add_option("--lambda-max", ya.lambda_max_nm, "Passband upper edge, nm");
    yield->add_option("--extinction", ya.extinction, "Extinction tables to sum (wavelength_nm, tau)");
    yield->add_flag("--no-extinction", ya.no_extinction, "Ignore extinction");
    yield->add_option("--flare-radius", ya.model.R_flare, "Flare region radius, m");
    yield->add_option("--flare-temperature", ya.model.T_flare, "Flare temperature, K");
    yield->add_option("--duration", ya.model.duration, "Flare duration, s");
    yield->add_option("--dwarf-radius", ya.model.R_dwarf, "Quiescent star radius, m");
    yield->add_option("--dwarf-temperature", ya.model.T_dwarf, "Quiescent star temperature, K");
    yield->add_option("--distance", ya.D_S_kpc, "Source distance, kpc");
    yield->add_option("--dm-structure", ya.dm_ref, "DM structure function at the reference lag, pc^2 cm^-6");
    yield->add_option("--ism-lag", ya.ism_lag, "Lag for the phase noise, s");
    yield->add_option("--ism-frequency", ya.ism_nu, "Optical frequency for the phase noise, Hz");

    std::optional<double> dust_rho, dust_ratio;
    std::optional<int> dust_dims;
    auto* dust = app.add_subcommand("dust", "Random-wall dust tree simulation");
    dust->add_option("--rho", dust_rho, "Particle density");
    dust->add_option("--ratio", dust_ratio, "Telescope size over particle size (power of two)");
    dust->add_option("--dims", dust_dims, "2 or 3")->check(CLI::IsMember({2, 3}));

    bool full_fringe = false;
    auto* capacity = app.add_subcommand("capacity", "Information per photon about the delay");
    capacity->add_flag("--full-fringe", full_fringe, "Use a fully modulated fringe regardless of --A");

    std::size_t array_sites = 3, array_photons = 0;
    auto* array = app.add_subcommand("array", "Pairwise delays across several telescope sites");
    array->add_option("--sites", array_sites, "Number of sites")->check(CLI::Range(2, 8));
    array->add_option("--photons", array_photons, "Photon budget (0 = sites x two-path requirement)");

    GeometryArgs ga;
    auto* geometry = app.add_subcommand("geometry", "Point-lens magnification, delay and timescales");
    geometry->add_option("--mass", ga.mass_solar, "Lens mass, solar masses");
    geometry->add_option("--lens-distance", ga.D_L_kpc, "Observer-lens distance, kpc");
    geometry->add_option("--source-distance", ga.D_S_kpc, "Observer-source distance, kpc");
    geometry->add_option("--velocity", ga.v_T_kms, "Transverse velocity, km/s");
    geometry->add_option("--u", ga.u, "Impact parameter in Einstein radii");
    geometry->add_option("--source-radius", ga.source_radius, "Emitting region radius, m");
    geometry->add_option("--u-min", ga.u_min, "Lower end of the f(u), A(u) table");
    geometry->add_option("--u-max", ga.u_max, "Upper end of the f(u), A(u) table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(demo)) {
            cmd_demo(g, demo_seeds);
            return 0;
        }
        ExperimentConfig cfg = resolve_config(g, ExperimentConfig{});
        if (app.got_subcommand(simulate)) cmd_simulate(cfg, sim);
        else if (app.got_subcommand(estimate)) cmd_estimate(cfg, estimate_in);
        else if (app.got_subcommand(curve)) {
            if (!curve_points.empty()) cfg.n_sig = curve_points;
            cmd_curve(cfg, curve_alg);
        } else if (app.got_subcommand(flares)) {
            if (!flare_points.empty()) cfg.n_sig = flare_points;
            cmd_flares(cfg);
        } else if (app.got_subcommand(yield)) cmd_yield(cfg, ya);
        else if (app.got_subcommand(dust)) cmd_dust(cfg, dust_rho, dust_ratio, dust_dims);
        else if (app.got_subcommand(capacity)) cmd_capacity(cfg, full_fringe);
        else if (app.got_subcommand(array)) cmd_array(cfg, array_sites, array_photons);
        else if (app.got_subcommand(geometry)) cmd_geometry(cfg, ga);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
