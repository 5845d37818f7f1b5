// Command-line driver: instance generation, bound verification suites, and
// CSV report emission. Exit codes: 0 all checks pass, 1 some bound failed,
// 2 configuration or I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>

#include "CLI11.hpp"

#include "mrfmech/coretail.hpp"
#include "mrfmech/gen.hpp"
#include "mrfmech/io.hpp"
#include "mrfmech/mechanisms.hpp"
#include "mrfmech/ocrs.hpp"
#include "mrfmech/prophet.hpp"

using namespace mrfmech;
namespace fs = std::filesystem;

namespace {

struct CsvWriter {
    std::ostream* os = nullptr;
    std::ofstream file;

    explicit CsvWriter(const std::string& path) {
        if (path == "-") {
            os = &std::cout;
        } else {
            file.open(path);
            if (!file) throw std::runtime_error("cannot open for writing: " + path);
            os = &file;
        }
    }
    void header(const std::string& h) { *os << h << "\n"; }
    void raw(const std::string& line) { *os << line << "\n"; }
};

std::string csv_num(double v) { return format_double(v); }

std::string instance_id_of(const std::string& path) { return fs::path(path).stem().string(); }

ValuationDistribution load_distribution(const std::string& path) {
    auto [m, g] = read_instance_file(path);
    return make_distribution(m, g);
}

struct SuiteTally {
    struct Entry {
        int total = 0;
        int passed = 0;
        double worst_slack = kInf;
    };
    std::vector<std::pair<std::string, Entry>> entries;
    bool all_pass = true;

    void add(const std::string& check, bool pass, double slack) {
        auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.first == check; });
        if (it == entries.end()) {
            entries.push_back({check, {}});
            it = std::prev(entries.end());
        }
        it->second.total += 1;
        it->second.passed += pass ? 1 : 0;
        it->second.worst_slack = std::min(it->second.worst_slack, slack);
        all_pass &= pass;
    }
    void print(std::ostream& os) const {
        for (const auto& [name, e] : entries)
            os << "  " << name << ": " << e.passed << "/" << e.total << " pass, worst slack "
               << format_double(e.worst_slack) << "\n";
    }
};

// ---- gen ----------------------------------------------------------------

int cmd_gen(std::uint64_t seed, int count, const std::string& klass, int n_min, int n_max, int sup_min,
            int sup_max, double potential_cap, const std::string& out_dir) {
    gen::InstanceGenConfig cfg;
    cfg.mrf = {n_min, n_max, sup_min, sup_max, potential_cap};
    if (klass == "additive") cfg.kind = ValuationKind::additive;
    else if (klass == "unit_demand") cfg.kind = ValuationKind::unit_demand;
    else if (klass == "subadditive") cfg.kind = ValuationKind::subadditive_table;
    else throw CLI::ValidationError("--class must be additive, unit_demand or subadditive");
    fs::create_directories(out_dir);
    for (int k = 0; k < count; ++k) {
        auto inst = gen::random_instance(seed + static_cast<std::uint64_t>(k) * 1000003ull, cfg);
        std::string name = klass + "_" + std::to_string(seed) + "_" + std::to_string(k) + ".mrfi";
        write_instance_file((fs::path(out_dir) / name).string(), inst.mrf, inst.g);
        std::cout << (fs::path(out_dir) / name).string() << "\n";
    }
    return 0;
}

// ---- bounds -------------------------------------------------------------

int cmd_bounds(const std::vector<std::string>& files, const std::string& out, unsigned jobs) {
    CsvWriter csv(out);
    csv.header("instance_id,setting,delta_nominal,delta_computed,bound_name,lhs,rhs,slack,pass");
    std::vector<std::vector<std::string>> blocks(files.size());
    std::vector<std::string> errors(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t k) {
        try {
            auto [m, g] = read_instance_file(files[k]);
            auto d = make_distribution(m, g);
            double delta = max_weighted_degree(m).delta;
            std::string id = instance_id_of(files[k]);
            std::string setting = to_string(setting_of(d.g));
            for (const auto& r : run_all_checks(d, delta)) {
                blocks[k].push_back(id + "," + setting + "," + csv_num(delta) + "," + csv_num(delta) + "," +
                                    r.name + "," + csv_num(r.lhs) + "," + csv_num(r.rhs) + "," +
                                    csv_num(r.slack) + "," + (r.pass ? "1" : "0"));
            }
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    });
    bool all_pass = true;
    for (std::size_t k = 0; k < files.size(); ++k) {
        if (!errors[k].empty()) {
            csv.raw(instance_id_of(files[k]) + ",error,nan,nan,error,nan,nan,nan,0");
            std::cerr << "error on " << files[k] << ": " << errors[k] << "\n";
            all_pass = false;
            continue;
        }
        for (const auto& line : blocks[k]) {
            all_pass &= line.back() == '1';
            csv.raw(line);
        }
    }
    return all_pass ? 0 : 1;
}

// ---- lp-rev -------------------------------------------------------------

void write_menu(std::ostream& os, const Menu& menu) {
    os << "menu/1\n";
    os << "options " << menu.options.size() << "\n";
    for (const auto& opt : menu.options) {
        os << "option price " << format_double(opt.price) << " lottery " << opt.lottery.size();
        for (auto [mask, pr] : opt.lottery) os << " set " << mask << " prob " << format_double(pr);
        os << "\n";
    }
    os << "end\n";
}

int cmd_lp_rev(const std::vector<std::string>& files, const std::string& out, const std::string& menu_dir,
               unsigned jobs) {
    CsvWriter csv(out);
    csv.header("instance_id,rev_opt,srev,brev,srev_prime,lp_iterations");
    if (!menu_dir.empty()) fs::create_directories(menu_dir);
    std::vector<std::string> rows(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t k) {
        auto d = load_distribution(files[k]);
        auto lp = optimal_rev(d);
        auto s = srev(d);
        auto b = brev(d);
        auto sp = srev_prime(d);
        rows[k] = instance_id_of(files[k]) + "," + csv_num(lp.revenue) + "," + csv_num(s.revenue) + "," +
                  csv_num(b.revenue) + "," + csv_num(sp.revenue) + "," + std::to_string(lp.lp_iterations);
        if (!menu_dir.empty()) {
            std::ofstream ms(fs::path(menu_dir) / (instance_id_of(files[k]) + ".menu"));
            write_menu(ms, lp.menu);
        }
    });
    for (const auto& r : rows) csv.raw(r);
    return 0;
}

// ---- prophet ------------------------------------------------------------

ProphetInstance prophet_from_file(const std::string& path) {
    auto [m, g] = read_instance_file(path);
    ProphetInstance inst;
    inst.mrf = std::move(m);
    inst.values = g.singleton;
    inst.order.resize(inst.values.size());
    for (std::size_t i = 0; i < inst.values.size(); ++i) inst.order[i] = static_cast<int>(i);
    return inst;
}

int cmd_prophet(const std::vector<std::string>& files, bool hard, double delta, const std::string& out) {
    CsvWriter csv(out);
    csv.header("instance_id,delta_nominal,delta_computed,e_max,alg_value,opt_online,ratio,bound,pass");
    bool all_pass = true;
    auto emit = [&](const std::string& id, const ProphetInstance& inst, double delta_nominal,
                    const LowerBoundClosedForm* cf) {
        auto jt = joint_table(inst.mrf);
        double dcomp = max_weighted_degree(inst.mrf).delta;
        double emax = expected_max(inst, jt);
        double alg = 0.0, ratio = 0.0;
        double bound = 20.0 * delta_nominal + 15.0;
        bool pass = true;
        if (emax > 0.0) {
            alg = evaluate_policy(inst, geometric_threshold_policy(inst, delta_nominal, jt), jt);
            ratio = emax / alg;
            pass = leq_tol(ratio, bound, 1e-9);
        }
        double opt_on = optimal_online(inst, jt);
        if (cf) {
            for (const auto& r : verify_lower_bound(inst, *cf, delta_nominal)) pass &= r.pass;
        }
        all_pass &= pass;
        csv.raw(id + "," + csv_num(delta_nominal) + "," + csv_num(dcomp) + "," + csv_num(emax) + "," +
                csv_num(alg) + "," + csv_num(opt_on) + "," + csv_num(ratio) + "," + csv_num(bound) + "," +
                (pass ? "1" : "0"));
    };
    if (hard) {
        auto h = hard_instance(delta);
        emit("hard_delta_" + format_double(delta), h.instance, delta, &h.cf);
    }
    for (const auto& f : files) {
        auto inst = prophet_from_file(f);
        double dcomp = max_weighted_degree(inst.mrf).delta;
        emit(instance_id_of(f), inst, dcomp, nullptr);
    }
    return all_pass ? 0 : 1;
}

// ---- ocrs ---------------------------------------------------------------

int cmd_ocrs(const std::vector<std::string>& files, bool hard, double delta, int random_count,
             std::uint64_t seed, const std::string& out) {
    CsvWriter csv(out);
    csv.header("instance_id,delta_nominal,delta_computed,alpha_scheme,selectability,max_alpha_hard,bound_4e_minus_delta,pass");
    bool all_pass = true;
    auto emit_instance = [&](const std::string& id, const OcrsInstance& inst, double dnom) {
        double dcomp = max_weighted_degree(inst.mrf).delta;
        double alpha = 1.0 / (1.0 + std::exp(4.0 * dcomp));
        bool pass = true;
        double sel = 0.0;
        try {
            auto sch = adaptive_scheme(inst, alpha);
            sel = selectability(inst, sch).min_ratio;
            pass = std::abs(sel - alpha) <= 1e-12;
        } catch (const std::exception&) {
            pass = false;
        }
        all_pass &= pass;
        csv.raw(id + "," + csv_num(dnom) + "," + csv_num(dcomp) + "," + csv_num(alpha) + "," + csv_num(sel) +
                ",nan,nan," + (pass ? "1" : "0"));
    };
    if (hard) {
        auto hp = hard_ocrs_params(delta);
        auto inst = hard_ocrs_instance(delta);
        double dcomp = max_weighted_degree(inst.mrf).delta;
        double alpha = 1.0 / (1.0 + std::exp(4.0 * dcomp));
        auto sch = adaptive_scheme(inst, alpha);
        double sel = selectability(inst, sch).min_ratio;
        double amax = max_alpha(hp.p, hp.q, hp.n);
        double bound = 4.0 * std::exp(-delta);
        bool pass = leq_tol(amax, bound, 1e-9) && std::abs(sel - alpha) <= 1e-12;
        all_pass &= pass;
        csv.raw("hard_delta_" + format_double(delta) + "," + csv_num(delta) + "," + csv_num(dcomp) + "," +
                csv_num(alpha) + "," + csv_num(sel) + "," + csv_num(amax) + "," + csv_num(bound) + "," +
                (pass ? "1" : "0"));
    }
    std::mt19937_64 rng(seed);
    for (int k = 0; k < random_count; ++k) {
        auto m = gen::random_sparse_binary_mrf(rng, 2, 4, 0.8);
        auto inst = make_ocrs_instance(std::move(m));
        emit_instance("random_" + std::to_string(seed) + "_" + std::to_string(k), inst,
                      max_weighted_degree(inst.mrf).delta);
    }
    for (const auto& f : files) {
        auto [m, g] = read_instance_file(f);
        auto inst = make_ocrs_instance(std::move(m));
        emit_instance(instance_id_of(f), inst, max_weighted_degree(inst.mrf).delta);
    }
    return all_pass ? 0 : 1;
}

// ---- verify-all ----------------------------------------------------------

int cmd_verify_all(std::uint64_t seed, const std::string& out, unsigned jobs, int bounds_count,
                   int conditioning_count, int prophet_count, int ocrs_count,
                   const std::vector<std::string>& selected) {
    auto wanted = [&](const std::string& group) {
        return std::find(selected.begin(), selected.end(), group) != selected.end();
    };
    for (const auto& g2 : selected)
        if (g2 != "conditioning" && g2 != "bounds" && g2 != "prophet" && g2 != "ocrs" && g2 != "none")
            throw std::runtime_error("unknown check group: " + g2);
    CsvWriter csv(out);
    csv.header("instance_id,check,lhs,rhs,slack,pass");
    SuiteTally tally;
    auto started = std::chrono::steady_clock::now();
    std::vector<std::string> lines;
    std::mutex mu;
    auto tally_row = [&](const std::string& id, const std::string& check, double lhs, double rhs,
                         double slack, bool pass) {
        std::string line = id + "," + check + "," + csv_num(lhs) + "," + csv_num(rhs) + "," + csv_num(slack) +
                           "," + (pass ? "1" : "0");
        std::scoped_lock lk(mu);
        tally.add(check, pass, slack);
        return line;
    };

    // conditioning suite
    if (wanted("conditioning")) {
        std::vector<std::vector<std::string>> blocks(static_cast<std::size_t>(conditioning_count));
        parallel_for(static_cast<std::size_t>(conditioning_count), jobs, [&](std::size_t k) {
            try {
                std::mt19937_64 rng(seed * 7919ull + k);
                auto m = gen::random_mrf(rng, 2, 4, 2, 3, 2.0);
                auto jt = joint_table(m);
                double delta = max_weighted_degree(m).delta;
                auto rep = check_conditioning_bounds(jt, delta, {.sample_count = 10'000, .seed = rng()});
                double hi = std::exp(4.0 * delta);
                blocks[k].push_back(tally_row("conditioning_" + std::to_string(k), "conditioning_ratio_bound",
                                              rep.max_ratio, hi, hi - rep.max_ratio, rep.pass));
            } catch (const std::exception&) {
                blocks[k].push_back(tally_row("conditioning_" + std::to_string(k), "error", 0, 0, 0, false));
            }
        });
        for (auto& b : blocks)
            for (auto& l : b) lines.push_back(std::move(l));
    }

    // revenue bound suites, one pool per buyer class
    if (wanted("bounds"))
    for (auto kind : {ValuationKind::additive, ValuationKind::unit_demand, ValuationKind::subadditive_table}) {
        gen::InstanceGenConfig cfg;
        cfg.mrf = {2, 3, 2, 3, 0.6};
        cfg.kind = kind;
        std::vector<std::vector<std::string>> blocks(static_cast<std::size_t>(bounds_count));
        parallel_for(static_cast<std::size_t>(bounds_count), jobs, [&](std::size_t k) {
            std::string id = std::string(to_string(kind)) + "_" + std::to_string(k);
            try {
                auto inst = gen::random_instance(
                    seed * 1299709ull + k * 31ull + static_cast<std::uint64_t>(kind) * 7ull, cfg);
                auto d = make_distribution(inst.mrf, inst.g);
                double delta = max_weighted_degree(inst.mrf).delta;
                for (const auto& r : run_all_checks(d, delta))
                    blocks[k].push_back(tally_row(id, r.name, r.lhs, r.rhs, r.slack, r.pass));
            } catch (const std::exception&) {
                blocks[k].push_back(tally_row(id, "error", 0, 0, 0, false));
            }
        });
        for (auto& b : blocks)
            for (auto& l : b) lines.push_back(std::move(l));
    }

    // prophet: random policy guarantee + hard instances
    if (wanted("prophet")) {
        std::vector<std::vector<std::string>> blocks(static_cast<std::size_t>(prophet_count));
        parallel_for(static_cast<std::size_t>(prophet_count), jobs, [&](std::size_t k) {
          try {
            std::mt19937_64 rng(seed * 104729ull + k);
            ProphetInstance inst;
            inst.mrf = gen::random_mrf(rng, 2, 4, 2, 3, 1.0);
            for (int i = 0; i < inst.mrf.n(); ++i) {
                std::vector<double> v;
                for (std::size_t w = 0; w < inst.mrf.supports[static_cast<std::size_t>(i)].size(); ++w)
                    v.push_back(gen::grid_value(rng));
                inst.values.push_back(v);
            }
            inst.order.resize(static_cast<std::size_t>(inst.mrf.n()));
            for (int i = 0; i < inst.mrf.n(); ++i) inst.order[static_cast<std::size_t>(i)] = i;
            auto jt = joint_table(inst.mrf);
            double delta = max_weighted_degree(inst.mrf).delta;
            double emax = expected_max(inst, jt);
            if (emax <= 0.0) return;
            double alg = evaluate_policy(inst, geometric_threshold_policy(inst, delta, jt), jt);
            blocks[k].push_back(tally_row("prophet_" + std::to_string(k), "prophet_policy_guarantee", emax,
                                          (20.0 * delta + 15.0) * alg, (20.0 * delta + 15.0) * alg - emax,
                                          leq_tol(emax, (20.0 * delta + 15.0) * alg, 1e-9)));
          } catch (const std::exception&) {
            blocks[k].push_back(tally_row("prophet_" + std::to_string(k), "error", 0, 0, 0, false));
          }
        });
        for (auto& b : blocks)
            for (auto& l : b) lines.push_back(std::move(l));
        for (double delta : {0.5, 1.0, 2.0}) {
            auto h = hard_instance(delta);
            for (const auto& r : verify_lower_bound(h.instance, h.cf, delta))
                lines.push_back(tally_row("prophet_hard_" + format_double(delta), r.name, r.lhs, r.rhs,
                                          r.slack, r.pass));
        }
    }

    // ocrs: adaptive selectability + hard-instance impossibility
    if (wanted("ocrs")) {
        std::mt19937_64 rng(seed * 224737ull);
        for (int k = 0; k < ocrs_count; ++k) {
            auto m = gen::random_sparse_binary_mrf(rng, 2, 4, 0.8);
            auto inst = make_ocrs_instance(std::move(m));
            double delta = max_weighted_degree(inst.mrf).delta;
            double alpha = 1.0 / (1.0 + std::exp(4.0 * delta));
            double sel = selectability(inst, adaptive_scheme(inst, alpha)).min_ratio;
            lines.push_back(tally_row("ocrs_" + std::to_string(k), "ocrs_adaptive_selectability",
                                      std::abs(sel - alpha), 1e-12, 1e-12 - std::abs(sel - alpha),
                                      std::abs(sel - alpha) <= 1e-12));
        }
        for (double delta : {1.0, 2.0, 3.0}) {
            auto hp = hard_ocrs_params(delta);
            double amax = max_alpha(hp.p, hp.q, hp.n);
            lines.push_back(tally_row("ocrs_hard_" + format_double(delta), "ocrs_hard_max_alpha", amax,
                                      4.0 * std::exp(-delta), 4.0 * std::exp(-delta) - amax,
                                      leq_tol(amax, 4.0 * std::exp(-delta), 1e-9)));
            double worst = 0.0;
            for (double alpha : {amax * 0.5, amax})
                worst = std::max(worst, std::abs(y_recursion_final(hp.p, hp.q, hp.n, alpha) -
                                                 y_closed_form_final(hp.p, hp.q, hp.n, alpha)));
            lines.push_back(tally_row("ocrs_hard_" + format_double(delta), "ocrs_y_recursion_closed_form",
                                      worst, 1e-12, 1e-12 - worst, worst <= 1e-12));
        }
    }

    for (const auto& l : lines) csv.raw(l);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    std::cerr << "verify-all: " << lines.size() << " checks in " << elapsed.count() << " ms\n";
    tally.print(std::cerr);
    return tally.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact verification of simple mechanisms, prophet inequalities and contention resolution under MRF correlations"};
    app.require_subcommand(1);

    // gen
    auto* g = app.add_subcommand("gen", "generate random instance files");
    std::uint64_t g_seed = 1;
    int g_count = 10, g_nmin = 2, g_nmax = 3, g_smin = 2, g_smax = 3;
    double g_cap = 0.6;
    std::string g_class = "additive", g_out = "instances";
    g->add_option("--seed", g_seed);
    g->add_option("--count", g_count);
    g->add_option("--class", g_class);
    g->add_option("--n-min", g_nmin);
    g->add_option("--n-max", g_nmax);
    g->add_option("--support-min", g_smin);
    g->add_option("--support-max", g_smax);
    g->add_option("--potential-cap", g_cap);
    g->add_option("--out-dir", g_out);

    // bounds
    auto* b = app.add_subcommand("bounds", "run the full bound suite on instance files");
    std::vector<std::string> b_files;
    std::string b_out = "-";
    unsigned b_jobs = default_jobs();
    b->add_option("--instances", b_files)->required();
    b->add_option("--out", b_out);
    b->add_option("--jobs", b_jobs);

    // lp-rev
    auto* l = app.add_subcommand("lp-rev", "optimal revenue LP vs simple mechanisms");
    std::vector<std::string> l_files;
    std::string l_out = "-", l_menus;
    unsigned l_jobs = default_jobs();
    l->add_option("--instances", l_files)->required();
    l->add_option("--out", l_out);
    l->add_option("--menu-dir", l_menus);
    l->add_option("--jobs", l_jobs);

    // prophet
    auto* p = app.add_subcommand("prophet", "prophet-inequality policies and hardness");
    std::vector<std::string> p_files;
    std::string p_out = "-";
    double p_delta = 1.0;
    bool p_hard = false;
    p->add_option("--instances", p_files);
    p->add_option("--delta", p_delta);
    p->add_flag("--hard-instance", p_hard);
    p->add_option("--out", p_out);

    // ocrs
    auto* o = app.add_subcommand("ocrs", "online contention resolution checks");
    std::vector<std::string> o_files;
    std::string o_out = "-";
    double o_delta = 1.0;
    bool o_hard = false;
    int o_random = 0;
    std::uint64_t o_seed = 1;
    o->add_option("--instances", o_files);
    o->add_option("--delta", o_delta);
    o->add_flag("--hard-instance", o_hard);
    o->add_option("--random", o_random);
    o->add_option("--seed", o_seed);
    o->add_option("--out", o_out);

    // verify-all
    auto* v = app.add_subcommand("verify-all", "run every suite on generated instances");
    std::uint64_t v_seed = 1;
    std::string v_out = "-";
    unsigned v_jobs = default_jobs();
    int v_bounds = 8, v_cond = 40, v_prophet = 40, v_ocrs = 20;
    std::vector<std::string> v_checks = {"conditioning", "bounds", "prophet", "ocrs"};
    v->add_option("--seed", v_seed);
    v->add_option("--out", v_out);
    v->add_option("--jobs", v_jobs);
    v->add_option("--bounds-count", v_bounds);
    v->add_option("--conditioning-count", v_cond);
    v->add_option("--prophet-count", v_prophet);
    v->add_option("--ocrs-count", v_ocrs);
    v->add_option("--checks", v_checks, "check groups to run (conditioning, bounds, prophet, ocrs, none)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*g) return cmd_gen(g_seed, g_count, g_class, g_nmin, g_nmax, g_smin, g_smax, g_cap, g_out);
        if (*b) return cmd_bounds(b_files, b_out, b_jobs);
        if (*l) return cmd_lp_rev(l_files, l_out, l_menus, l_jobs);
        if (*p) return cmd_prophet(p_files, p_hard, p_delta, p_out);
        if (*o) return cmd_ocrs(o_files, o_hard, o_delta, o_random, o_seed, o_out);
        if (*v) return cmd_verify_all(v_seed, v_out, v_jobs, v_bounds, v_cond, v_prophet, v_ocrs, v_checks);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
