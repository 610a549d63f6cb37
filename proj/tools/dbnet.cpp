// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
//
// dbnet: analyze finite linear reaction networks. Subcommands: validate,
// analyze, probe, simulate, response, dims. Reports are deterministic
// key = value documents; series data is CSV.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbnet/dbnet.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumeric = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw dbnet::ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct LoadedNetwork {
    dbnet::Network net;
    dbnet::Generator gen;
    std::string digest;
    std::string path;
};

LoadedNetwork load(const std::string& path) {
    LoadedNetwork out;
    out.path = path;
    std::string text = read_file(path);
    out.digest = dbnet::fnv1a_digest(text);
    out.net = dbnet::parse_network(text);
    out.gen = dbnet::build_generator(out.net);
    return out;
}

std::string join_labels(const dbnet::Network& net, const std::vector<int>& ix) {
    std::string s;
    for (std::size_t k = 0; k < ix.size(); ++k) s += (k ? "," : "") + net.states[ix[k]];
    return s;
}

std::string pair_label(const dbnet::Network& net, dbnet::StatePair p) {
    return net.states[p.first] + "," + net.states[p.second];
}

std::vector<double> parse_times(const std::vector<std::string>& raw) {
    std::vector<double> out;
    for (const auto& s : raw) out.push_back(std::stod(s));
    return out;
}

void emit(const dbnet::ReportWriter& report) { std::cout << report.str(); }

int cmd_validate(const std::string& file) {
    LoadedNetwork ln = load(file);
    dbnet::ReportWriter report("validate");
    report.kv("input", file);
    report.kv("input_digest", ln.digest);
    report.kv("states", ln.net.size());
    report.kv("rates", static_cast<long>(ln.net.rates.size()));
    report.kv("column_residual", ln.gen.column_residual);

    bool ok = true;
    auto erg = dbnet::check_ergodic(ln.gen);
    report.section("ergodicity");
    report.kv("ergodic", erg.ergodic);
    report.kv("scc_count", erg.scc_count);
    if (erg.witness)
        report.kv("witness", pair_label(ln.net, {erg.witness->first, erg.witness->second}));
    // source/sink networks are never globally ergodic; their interior block
    // carries the requirement instead (checked below)
    if (!ln.net.compartments) ok = ok && erg.ergodic;

    if (ln.net.class_annotation) {
        report.section("class");
        auto conflicts = dbnet::annotation_support_conflicts(ln.net);
        report.kv("forbidden_pairs_with_rates", static_cast<long>(conflicts.size()));
        ok = ok && conflicts.empty();
        if (erg.ergodic) {
            auto n = dbnet::steady_state(ln.gen);
            auto mem = dbnet::check_class_membership(ln.net, n);
            report.kv("member", mem.member);
            for (const auto& v : mem.violations)
                report.kv("violation_" + v.kind, pair_label(ln.net, v.pair) + " residual " +
                                                     dbnet::format_double(v.residual));
            ok = ok && mem.member;
        }
    }
    if (ln.net.compartments) {
        report.section("compartments");
        auto comp = dbnet::check_compartments(ln.net);
        for (const auto& [name, pass] : comp.conditions) report.kv(name, pass);
        report.kv("pass", comp.pass);
        ok = ok && comp.pass;
        if (comp.pass) {
            bool interior_ok = true;
            try {
                auto ext = dbnet::check_extended_db(ln.net);
                report.kv("interior_ergodic", true);
                report.kv("extended_db", ext.satisfied);
            } catch (const dbnet::ValidationError&) {
                interior_ok = false;
                report.kv("interior_ergodic", false);
            }
            ok = ok && interior_ok;
        }
    }
    report.section("verdict");
    report.kv("valid", ok);
    emit(report);
    return ok ? kExitOk : kExitValidation;
}

int cmd_analyze(const std::string& file, const std::string& si, const std::string& sj,
                std::vector<double> times, bool exact) {
    LoadedNetwork ln = load(file);
    int i = ln.net.index_of(si), j = ln.net.index_of(sj);
    auto erg = dbnet::check_ergodic(ln.gen);
    if (!erg.ergodic) throw dbnet::ValidationError("network is not ergodic");
    auto n = dbnet::steady_state(ln.gen);

    dbnet::ReportWriter report("analyze");
    report.kv("input", file);
    report.kv("input_digest", ln.digest);
    report.kv("pair", si + "," + sj);
    report.kv("exact", exact);

    report.section("steady_state");
    for (int k = 0; k < ln.net.size(); ++k) {
        if (exact && n.exact)
            report.kv(ln.net.states[k], dbnet::format_rational((*n.exact)[k]));
        else
            report.kv(ln.net.states[k], n.values[k]);
    }
    report.kv("residual", n.residual);

    auto db = dbnet::check_detailed_balance(ln.gen, n);
    report.section("detailed_balance");
    report.kv("satisfied", db.satisfied);
    if (!db.satisfied) {
        report.kv("worst_pair", pair_label(ln.net, db.worst_pair));
        report.kv("worst_residual", db.worst_residual);
    }

    auto pdb = dbnet::check_pdb(ln.gen, n, i, j);
    report.section("pathwise_detailed_balance");
    report.kv("holds", pdb.holds);
    if (pdb.first_failing_n) report.kv("first_failing_n", *pdb.first_failing_n);
    report.kv("ratio_constant_c", pdb.series.ratio_constant);
    for (std::size_t k = 0; k < pdb.series.values.size(); ++k) {
        std::string key = "delta_" + std::to_string(k + 1);
        if (exact && pdb.series.exact)
            report.kv(key, dbnet::format_rational((*pdb.series.exact)[k]));
        else
            report.kv(key, pdb.series.values[k]);
    }

    auto ratio = dbnet::response_ratio_test(ln.gen, i, j, times);
    report.section("response_ratio");
    report.kv("constant", ratio.constant);
    report.kv("fitted_c", ratio.fitted_c);
    report.kv("max_deviation", ratio.max_deviation);

    auto g = dbnet::support_graph(ln.gen);
    auto cuts = dbnet::find_cut_vertices(g);
    report.section("topology");
    report.kv("symmetric_support", g.symmetric);
    std::vector<int> cut_list(cuts.begin(), cuts.end());
    report.kv("cut_vertices", cut_list.empty() ? std::string("none") : join_labels(ln.net, cut_list));
    if (ln.net.class_annotation) {
        auto shape = dbnet::check_stability_class_shape(g, *ln.net.class_annotation);
        report.kv("cut_class", shape.is_cut_class);
        if (shape.cut_vertex) report.kv("cut_class_vertex", ln.net.states[*shape.cut_vertex]);
        if (shape.balanced_side) report.kv("balanced_side", join_labels(ln.net, *shape.balanced_side));
    }
    emit(report);
    return kExitOk;
}

int cmd_probe(const std::string& file, const std::string& si, const std::string& sj,
              std::optional<double> eps, std::uint64_t seed, int trials, double radius,
              bool weak) {
    LoadedNetwork ln = load(file);
    int i = ln.net.index_of(si), j = ln.net.index_of(sj);
    auto n = dbnet::steady_state(ln.gen);
    const dbnet::ClassAnnotation* ann =
        ln.net.class_annotation ? &*ln.net.class_annotation : nullptr;
    auto verdict = dbnet::instability_probe(ln.gen, n, i, j, eps, ann);

    dbnet::ReportWriter report("probe");
    report.kv("input", file);
    report.kv("input_digest", ln.digest);
    report.kv("pair", si + "," + sj);
    report.kv("seed", seed);

    report.section("verdict");
    report.kv("pdb_holds", verdict.pdb_holds);
    report.kv("db_holds", verdict.db_holds);
    std::string label = verdict.db_holds ? "DB" : (verdict.stable ? "STABLE" : "UNSTABLE");
    report.kv("stability", label);
    if (verdict.witness) {
        report.kv("witness_path", join_labels(ln.net, verdict.witness->perturbation.path.vertices));
        report.kv("witness_alpha", pair_label(ln.net, verdict.witness->perturbation.excluded_edge));
        report.kv("witness_n", verdict.witness->n);
        report.kv("witness_delta", verdict.witness->delta_value);
        report.kv("epsilon", verdict.eps_used);
    }
    if (verdict.witness) {
        report.kv("analytic_derivative", verdict.analytic_derivative);
        report.kv("fd_derivative", verdict.fd_derivative);
    }
    if (verdict.cut_class.is_cut_class) {
        report.kv("cut_class", true);
        report.kv("cut_class_vertex", ln.net.states[*verdict.cut_class.cut_vertex]);
        report.kv("balanced_side", join_labels(ln.net, *verdict.cut_class.balanced_side));
    }

    if (trials > 0) {
        auto sampling = dbnet::stability_sampling(ln.net, i, j, trials, radius, seed, weak);
        report.section("sampling");
        report.kv("trials", sampling.trials);
        report.kv("violations", sampling.violations);
        report.kv("max_delta", sampling.max_delta);
        report.kv("rebalance_failures", sampling.rebalance_failures);
        report.kv("radius", radius);
        report.kv("weak_topology", weak);
    }
    emit(report);
    return kExitOk;
}

int cmd_simulate(const std::string& file, const std::string& si, const std::string& sj,
                 std::vector<double> times, long samples, std::optional<double> t1,
                 std::optional<double> t2, long cycles, std::uint64_t seed, int workers,
                 const std::string& csv_path) {
    LoadedNetwork ln = load(file);
    int i = ln.net.index_of(si), j = ln.net.index_of(sj);

    dbnet::ReportWriter report("simulate");
    report.kv("input", file);
    report.kv("input_digest", ln.digest);
    report.kv("pair", si + "," + sj);
    report.kv("seed", seed);
    std::string csv;

    if (t1 && t2) {
        auto est = dbnet::estimate_response_regenerative(ln.gen, i, j, *t1, *t2, cycles, seed);
        report.section("regenerative");
        report.kv("cycles", est.cycles);
        report.kv("r_ij_t1", est.r_ij_t1);
        report.kv("r_ij_t2", est.r_ij_t2);
        report.kv("r_ji_t1", est.r_ji_t1);
        report.kv("r_ji_t2", est.r_ji_t2);
        report.kv("ratio_test_p", est.ratio_test_p);
        double n = static_cast<double>(est.cycles);
        auto hw = [&](double p) { return 1.96 * std::sqrt(p * (1 - p) / n); };
        csv = dbnet::to_csv("t,estimate,half_width,samples",
                            {{*t1, est.r_ij_t1, hw(est.r_ij_t1), n},
                             {*t2, est.r_ij_t2, hw(est.r_ij_t2), n},
                             {*t1, est.r_ji_t1, hw(est.r_ji_t1), n},
                             {*t2, est.r_ji_t2, hw(est.r_ji_t2), n}});
    } else {
        if (times.empty()) throw dbnet::ValidationError("iid mode needs --times");
        auto est = dbnet::estimate_response_iid(ln.gen, i, j, times, samples, seed, workers);
        report.section("iid");
        report.kv("samples", est.samples);
        report.kv("workers", workers);
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < est.times.size(); ++k) {
            rows.push_back({est.times[k], est.estimates[k], est.half_widths[k],
                            static_cast<double>(est.samples)});
            report.kv("estimate_t" + std::to_string(k), est.estimates[k]);
        }
        csv = dbnet::to_csv("t,estimate,half_width,samples", rows);
    }

    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw dbnet::ParseError("cannot write '" + csv_path + "'");
        out << csv;
        report.section("output");
        report.kv("csv", csv_path);
    }
    emit(report);
    return kExitOk;
}

int cmd_response(const std::string& file, const std::string& si, const std::string& sj,
                 std::vector<double> times, bool open_network) {
    LoadedNetwork ln = load(file);
    int i = ln.net.index_of(si), j = ln.net.index_of(sj);
    std::vector<std::vector<double>> rows;
    if (open_network) {
        auto rij = dbnet::open_response(ln.net, i, j, times);
        auto rji = dbnet::open_response(ln.net, j, i, times);
        for (std::size_t k = 0; k < times.size(); ++k)
            rows.push_back({times[k], rij.values[k], rji.values[k]});
    } else {
        for (double t : times) {
            auto prop = dbnet::propagate(ln.gen, t);
            rows.push_back({t, prop.matrix(j, i), prop.matrix(i, j)});
        }
    }
    std::cout << dbnet::to_csv("t,r_ij,r_ji", rows);
    return kExitOk;
}

int cmd_dims(int length) {
    auto rep = dbnet::dimension_report(length);
    dbnet::ReportWriter report("dims");
    report.kv("L", rep.L);
    report.section("dimensions");
    report.kv("dim_A", rep.dim_A);
    report.kv("dim_B", rep.dim_B);
    report.kv("dim_C", rep.dim_C);
    for (int d = 1; d <= std::min(rep.L, 6); ++d)
        report.kv("dim_C_" + std::to_string(d), dbnet::dim_C_d(rep.L, d));
    report.kv("reciprocal_d_for_equality", rep.reciprocal_d_for_equality);
    report.kv("constraint_counting", rep.note);

    auto rank = dbnet::nonreciprocal_rank_check();
    report.section("nonreciprocal_rank_check");
    report.kv("determinant_nonzero", rank.determinant_nonzero);
    report.kv("printed_det", rank.printed_det);
    report.kv("recomputed_det", rank.recomputed_det);
    report.kv("recomputation_matches", rank.recomputation_matches);
    for (int r = 0; r < 6; ++r) {
        std::string row, row2;
        for (int c = 0; c < 6; ++c) {
            row += (c ? " " : "") + std::to_string(rank.printed[r][c]);
            row2 += (c ? " " : "") + std::to_string(rank.recomputed[r][c]);
        }
        report.kv("printed_row_" + std::to_string(r), row);
        report.kv("recomputed_row_" + std::to_string(r), row2);
    }
    emit(report);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"linear reaction network analyzer"};
    app.require_subcommand(1);

    std::string file, csv_path;
    std::vector<std::string> pair_raw;
    std::vector<std::string> times_raw{"0.1", "0.5", "1", "2", "5"};
    std::uint64_t seed = 0;
    int trials = 0, workers = 1, dims_length = 3;
    long samples = 10000, cycles = 1000;
    double radius = 1e-3;
    std::optional<double> eps, t1, t2;
    bool exact = false, weak = false, open_network = false;

    auto add_pair = [&](CLI::App* cmd) {
        cmd->add_option("--pair", pair_raw, "state pair i j")->expected(2)->required();
    };

    auto* validate = app.add_subcommand("validate", "parse and structurally validate a network file");
    validate->add_option("file", file)->required();

    auto* analyze = app.add_subcommand("analyze", "steady state, DB/PDB verdicts, topology");
    analyze->add_option("file", file)->required();
    add_pair(analyze);
    analyze->add_option("--times", times_raw, "time grid for the ratio test");
    analyze->add_flag("--exact", exact, "print exact rationals where available");

    auto* probe = app.add_subcommand("probe", "stability probe and class sampling");
    probe->add_option("file", file)->required();
    add_pair(probe);
    double eps_val = 0;
    auto* eps_opt = probe->add_option("--eps", eps_val, "probe perturbation size");
    probe->add_option("--seed", seed);
    probe->add_option("--trials", trials, "sampling trials (0 = skip)");
    probe->add_option("--radius", radius, "sampling radius");
    probe->add_flag("--weak-topology", weak, "also perturb forbidden pairs");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo response estimation");
    simulate->add_option("file", file)->required();
    add_pair(simulate);
    simulate->add_option("--times", times_raw, "iid-mode time grid");
    simulate->add_option("--samples", samples);
    double t1_val = 0, t2_val = 0;
    auto* t1_opt = simulate->add_option("--t1", t1_val, "regenerative-mode first time");
    auto* t2_opt = simulate->add_option("--t2", t2_val, "regenerative-mode second time");
    simulate->add_option("--cycles", cycles);
    simulate->add_option("--seed", seed);
    simulate->add_option("--workers", workers);
    simulate->add_option("--csv", csv_path, "write the series CSV here");

    auto* response = app.add_subcommand("response", "exact response functions as CSV");
    response->add_option("file", file)->required();
    add_pair(response);
    response->add_option("--times", times_raw);
    response->add_flag("--open", open_network, "open-network response (sources/sinks)");

    auto* dims = app.add_subcommand("dims", "dimension counts and the rank check");
    dims->add_option("--L", dims_length)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        std::string state_i = pair_raw.size() > 0 ? pair_raw[0] : "";
        std::string state_j = pair_raw.size() > 1 ? pair_raw[1] : "";
        if (validate->parsed()) return cmd_validate(file);
        if (analyze->parsed()) return cmd_analyze(file, state_i, state_j, parse_times(times_raw), exact);
        if (probe->parsed()) {
            if (!eps_opt->empty()) eps = eps_val;
            return cmd_probe(file, state_i, state_j, eps, seed, trials, radius, weak);
        }
        if (simulate->parsed()) {
            if (!t1_opt->empty()) t1 = t1_val;
            if (!t2_opt->empty()) t2 = t2_val;
            return cmd_simulate(file, state_i, state_j, parse_times(times_raw), samples, t1, t2,
                                cycles, seed, workers, csv_path);
        }
        if (response->parsed())
            return cmd_response(file, state_i, state_j, parse_times(times_raw), open_network);
        if (dims->parsed()) return cmd_dims(dims_length);
    } catch (const dbnet::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const dbnet::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const dbnet::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
