#include "lowres/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

namespace lowres {

namespace {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (err) std::rethrow_exception(err);
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string fmt_raw(double v) { return fmt("%.17g", v); }
std::string fmt_acc(double v) { return fmt("%.1f", v * 100.0); }  // accuracy x100
std::string fmt3(double v) { return fmt("%.3f", v); }

std::string ratio_label(double train_frac) {
    int trn = static_cast<int>(std::llround(train_frac * 100.0));
    return std::to_string(trn) + ":" + std::to_string(100 - trn);
}

std::ofstream open_out(const ExperimentConfig& cfg, const std::string& file) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(std::filesystem::path(cfg.out_dir) / file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + file + " in " + cfg.out_dir);
    return out;
}

Rng rep_rng(const ExperimentConfig& cfg, int rep) {
    return Rng(cfg.seed).split("rep").split(static_cast<std::uint64_t>(rep));
}

RunOutcome outcome_of(const ModelSpec& spec, const ParameterVector& params, const Dataset& test,
                      int bins, int stop_epoch) {
    MetricReport m = evaluate(predict(spec, params, test), bins);
    return {m.accuracy, m.loss, m.ece, m.oe, stop_epoch};
}

std::optional<Dataset> maybe_load_csv(const ExperimentConfig& cfg) {
    if (cfg.csv_path.empty()) return std::nullopt;
    return load_csv(cfg.csv_path);
}

void write_summary_header(std::ofstream& out, const std::string& key_cols) {
    out << key_cols
        << ",acc_mean,acc_std,loss_mean,loss_std,ece_mean,ece_std,oe_mean,oe_std"
        << ",stop_epoch_mean,stop_epoch_std\n";
}

void write_summary_row(std::ofstream& out, const std::string& key,
                       const std::vector<RunOutcome>& runs) {
    auto col = [&](auto get) {
        std::vector<double> v;
        v.reserve(runs.size());
        for (const auto& r : runs) v.push_back(get(r));
        return aggregate(v);
    };
    Aggregate acc = col([](const RunOutcome& r) { return r.accuracy; });
    Aggregate loss = col([](const RunOutcome& r) { return r.loss; });
    Aggregate e = col([](const RunOutcome& r) { return r.ece; });
    Aggregate o = col([](const RunOutcome& r) { return r.oe; });
    Aggregate se = col([](const RunOutcome& r) { return static_cast<double>(r.stop_epoch); });
    out << key << ',' << fmt_acc(acc.mean) << ',' << fmt_acc(acc.stddev) << ',' << fmt3(loss.mean)
        << ',' << fmt3(loss.stddev) << ',' << fmt3(e.mean) << ',' << fmt3(e.stddev) << ','
        << fmt3(o.mean) << ',' << fmt3(o.stddev) << ',' << fmt("%.2f", se.mean) << ','
        << fmt("%.2f", se.stddev) << '\n';
}

void write_runs_header(std::ofstream& out, const std::string& key_cols) {
    out << "run," << key_cols << ",accuracy,loss,ece,oe,stop_epoch\n";
}

void write_run_row(std::ofstream& out, int run, const std::string& key, const RunOutcome& r) {
    out << run << ',' << key << ',' << fmt_raw(r.accuracy) << ',' << fmt_raw(r.loss) << ','
        << fmt_raw(r.ece) << ',' << fmt_raw(r.oe) << ',' << r.stop_epoch << '\n';
}

void write_histogram(const ExperimentConfig& cfg, const std::string& file,
                     const ConfidenceHistogram& h) {
    auto out = open_out(cfg, file);
    out << "bin,lower,upper,count\n";
    const auto m = static_cast<int>(h.counts.size());
    for (int b = 0; b < m; ++b) {
        out << (b + 1) << ',' << fmt_raw(static_cast<double>(b) / m) << ','
            << fmt_raw(static_cast<double>(b + 1) / m) << ',' << h.counts[b] << '\n';
    }
}

std::vector<std::size_t> even_counts(std::size_t total, int classes) {
    std::vector<std::size_t> counts(classes, total / classes);
    for (std::size_t i = 0; i < total % classes; ++i) ++counts[i];
    return counts;
}

ModelSpec resolve_model(const ExperimentConfig& cfg, const Dataset& pool) {
    ModelSpec spec = cfg.model;
    spec.input_dim = static_cast<int>(pool.dim());
    spec.num_classes = pool.num_classes;
    return spec;
}

FogipConfig make_fogip_config(const ExperimentConfig& cfg, Rng rng) {
    FogipConfig fc;
    fc.optim = cfg.optim;
    fc.output_block_only = cfg.fogip_output_block_only;
    Rng seeds = rng.split("candidate_seeds");
    fc.base_seed = seeds.next_u64();
    for (int i = 0; i < cfg.fogip_candidates_n; ++i) fc.candidate_seeds.push_back(seeds.next_u64());
    return fc;
}

}  // namespace

Aggregate aggregate(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("aggregate: no values");
    Aggregate a;
    a.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return a;
}

std::pair<Dataset, Dataset> pool_and_test(const ExperimentConfig& cfg, const Dataset* full,
                                          Rng rep_rng) {
    if (full) return stratified_holdout(*full, cfg.label_frac, rep_rng.split("split"));
    const auto& s = cfg.synth;
    std::size_t total = s.pool_size + s.test_size;
    Dataset data = synth_gaussian(s.classes, s.dim, even_counts(total, s.classes), s.separation,
                                  s.noise, rep_rng.split("data"));
    double frac = static_cast<double>(s.pool_size) / static_cast<double>(total);
    return stratified_holdout(data, frac, rep_rng.split("split"));
}

RunOutcome run_val_row(const ExperimentConfig& cfg, const Dataset& pool, const Dataset& test,
                       double train_frac, Rng rng) {
    ModelSpec spec = resolve_model(cfg, pool);
    auto [train_set, val_set] = stratified_holdout(pool, train_frac, rng.split("tv"));
    ParameterVector init = init_params(spec, rng.split("init"));
    TrainResult res =
        train(spec, init, train_set, cfg.optim, val_based_criterion(val_set), rng.split("train"));
    return outcome_of(spec, res.params, test, cfg.bins, res.trace.stop_epoch);
}

RunOutcome run_pe_row(const ExperimentConfig& cfg, const Dataset& pool, const Dataset& test,
                      Rng rng, int* pe_epoch) {
    ModelSpec spec = resolve_model(cfg, pool);
    PeResult pe = estimate_pe_stop_epoch(spec, pool, cfg.pe_folds, cfg.optim, rng.split("pe"));
    if (pe_epoch) *pe_epoch = pe.pe_stop_epoch;
    ParameterVector init = init_params(spec, rng.split("init"));
    TrainResult res = train(spec, init, pool, cfg.optim, fixed_epoch_criterion(pe.pe_stop_epoch),
                            rng.split("train"));
    return outcome_of(spec, res.params, test, cfg.bins, res.trace.stop_epoch);
}

RunOutcome run_eb_row(const ExperimentConfig& cfg, const Dataset& pool, const Dataset& test,
                      Rng rng) {
    ModelSpec spec = resolve_model(cfg, pool);
    ParameterVector init = init_params(spec, rng.split("init"));
    TrainResult res = train(spec, init, pool, cfg.optim, eb_criterion(), rng.split("train"));
    return outcome_of(spec, res.params, test, cfg.bins, res.trace.stop_epoch);
}

FogipRepOutcome run_fogip_rep(const ExperimentConfig& cfg, const Dataset& pool,
                              const Dataset& test, Rng rng) {
    ModelSpec spec = resolve_model(cfg, pool);
    FogipConfig fc = make_fogip_config(cfg, rng);
    FogipResult good = fogip(pool, fc, spec, rng.split("fogip"));
    auto candidates = fogip_candidates(spec, fc);
    ParameterVector normal = candidates[rng.split("pick").below(candidates.size())];

    PeResult pe = estimate_pe_stop_epoch(spec, pool, cfg.pe_folds, cfg.optim, rng.split("pe"));
    auto run_with = [&](const ParameterVector& init, bool use_eb, Rng r) {
        StopCriterion crit = use_eb ? eb_criterion() : fixed_epoch_criterion(pe.pe_stop_epoch);
        TrainResult res = train(spec, init, pool, cfg.optim, crit, r);
        return outcome_of(spec, res.params, test, cfg.bins, res.trace.stop_epoch);
    };
    FogipRepOutcome out;
    out.normal_pe = run_with(normal, false, rng.split("normal_pe"));
    out.normal_eb = run_with(normal, true, rng.split("normal_eb"));
    out.good_pe = run_with(good.good_params, false, rng.split("good_pe"));
    out.good_eb = run_with(good.good_params, true, rng.split("good_eb"));
    return out;
}

int cmd_compare_criteria(const ExperimentConfig& cfg) {
    auto full = maybe_load_csv(cfg);
    const Dataset* full_ptr = full ? &*full : nullptr;
    const int rows_per_rep = static_cast<int>(cfg.val_ratios.size()) + 2;

    std::vector<std::vector<RunOutcome>> results(cfg.repetitions,
                                                 std::vector<RunOutcome>(rows_per_rep));
    parallel_for(cfg.repetitions, cfg.jobs, [&](int r) {
        Rng rng = rep_rng(cfg, r);
        auto [pool, test] = pool_and_test(cfg, full_ptr, rng.split("data"));
        int i = 0;
        for (double frac : cfg.val_ratios)
            results[r][i++] = run_val_row(cfg, pool, test, frac, rng.split(ratio_label(frac)));
        results[r][i++] = run_pe_row(cfg, pool, test, rng.split("pe_row"));
        results[r][i++] = run_eb_row(cfg, pool, test, rng.split("eb_row"));
    });

    std::vector<std::string> keys;
    for (double frac : cfg.val_ratios) keys.push_back(ratio_label(frac) + ",val");
    keys.emplace_back("100:0,pe");
    keys.emplace_back("100:0,eb");

    auto runs_out = open_out(cfg, "runs.csv");
    write_runs_header(runs_out, "trn_val,criterion");
    for (int r = 0; r < cfg.repetitions; ++r)
        for (int i = 0; i < rows_per_rep; ++i) write_run_row(runs_out, r, keys[i], results[r][i]);

    auto summary_out = open_out(cfg, "summary.csv");
    write_summary_header(summary_out, "trn_val,criterion");
    for (int i = 0; i < rows_per_rep; ++i) {
        std::vector<RunOutcome> column;
        column.reserve(cfg.repetitions);
        for (int r = 0; r < cfg.repetitions; ++r) column.push_back(results[r][i]);
        write_summary_row(summary_out, keys[i], column);
    }
    return 0;
}

int cmd_fogip_compare(const ExperimentConfig& cfg) {
    auto full = maybe_load_csv(cfg);
    const Dataset* full_ptr = full ? &*full : nullptr;

    std::vector<FogipRepOutcome> results(cfg.repetitions);
    parallel_for(cfg.repetitions, cfg.jobs, [&](int r) {
        Rng rng = rep_rng(cfg, r);
        auto [pool, test] = pool_and_test(cfg, full_ptr, rng.split("data"));
        results[r] = run_fogip_rep(cfg, pool, test, rng.split("fogip_rep"));
    });

    const std::vector<std::pair<std::string, RunOutcome FogipRepOutcome::*>> rows = {
        {"normal,pe", &FogipRepOutcome::normal_pe},
        {"normal,eb", &FogipRepOutcome::normal_eb},
        {"good,pe", &FogipRepOutcome::good_pe},
        {"good,eb", &FogipRepOutcome::good_eb},
    };

    auto runs_out = open_out(cfg, "runs.csv");
    write_runs_header(runs_out, "init,criterion");
    for (int r = 0; r < cfg.repetitions; ++r)
        for (const auto& [key, member] : rows) write_run_row(runs_out, r, key, results[r].*member);

    auto summary_out = open_out(cfg, "summary.csv");
    write_summary_header(summary_out, "init,criterion");
    std::vector<std::vector<RunOutcome>> columns;
    for (const auto& [key, member] : rows) {
        std::vector<RunOutcome> column;
        column.reserve(cfg.repetitions);
        for (int r = 0; r < cfg.repetitions; ++r) column.push_back(results[r].*member);
        write_summary_row(summary_out, key, column);
        columns.push_back(std::move(column));
    }
    // improvement = good mean - normal mean, per criterion
    auto mean_of = [](const std::vector<RunOutcome>& v, auto get) {
        std::vector<double> x;
        x.reserve(v.size());
        for (const auto& r : v) x.push_back(get(r));
        return aggregate(x).mean;
    };
    for (int c = 0; c < 2; ++c) {  // 0 = pe, 1 = eb
        const auto& normal = columns[c];
        const auto& good = columns[2 + c];
        auto diff = [&](auto get) { return mean_of(good, get) - mean_of(normal, get); };
        summary_out << "improvement," << (c == 0 ? "pe" : "eb") << ','
                    << fmt("%+.1f", diff([](const RunOutcome& r) { return r.accuracy; }) * 100.0)
                    << ",,"
                    << fmt("%+.3f", diff([](const RunOutcome& r) { return r.loss; })) << ",,"
                    << fmt("%+.3f", diff([](const RunOutcome& r) { return r.ece; })) << ",,"
                    << fmt("%+.3f", diff([](const RunOutcome& r) { return r.oe; })) << ",,,\n";
    }
    return 0;
}

int cmd_hyper_grid(const ExperimentConfig& cfg) {
    if (cfg.grid_lr.empty() || cfg.grid_dropout.empty() || cfg.grid_batch.empty())
        throw std::invalid_argument("hyper-grid: grid lists must be nonempty");
    auto full = maybe_load_csv(cfg);
    const Dataset* full_ptr = full ? &*full : nullptr;

    // Tuning on a 50:50 split of the first repetition's pool.
    Rng tune_rng = rep_rng(cfg, 0);
    auto [pool0, test0] = pool_and_test(cfg, full_ptr, tune_rng.split("data"));
    auto [tune_train, tune_val] = stratified_holdout(pool0, 0.5, tune_rng.split("tune_split"));

    struct GridPoint {
        double lr;
        double dropout;
        std::size_t batch;
        double val_loss;
    };
    std::vector<GridPoint> grid;
    for (double lr : cfg.grid_lr)
        for (double dr : cfg.grid_dropout)
            for (std::size_t bs : cfg.grid_batch) grid.push_back({lr, dr, bs, 0.0});

    ModelSpec spec0 = resolve_model(cfg, pool0);
    parallel_for(static_cast<int>(grid.size()), cfg.jobs, [&](int i) {
        ModelSpec spec = spec0;
        spec.dropout_rate = grid[i].dropout;
        OptimConfig opt = cfg.optim;
        opt.learning_rate = grid[i].lr;
        opt.batch_size = grid[i].batch;
        Rng rng = tune_rng.split("grid").split(static_cast<std::uint64_t>(i));
        ParameterVector init = init_params(spec, rng.split("init"));
        TrainResult res = train(spec, init, tune_train, opt, val_based_criterion(tune_val),
                                rng.split("train"));
        double best = *res.trace.records.front().val_loss;
        for (const auto& rec : res.trace.records) best = std::min(best, *rec.val_loss);
        grid[i].val_loss = best;
    });

    std::size_t tuned = 0;  // strict < keeps declaration-order tie-break
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i].val_loss < grid[tuned].val_loss) tuned = i;

    // Retrain 100:0 with Norm-PE under both settings, R repetitions.
    auto final_runs = [&](double lr, double dropout, std::size_t batch) {
        std::vector<RunOutcome> runs(cfg.repetitions);
        parallel_for(cfg.repetitions, cfg.jobs, [&](int r) {
            ExperimentConfig c2 = cfg;
            c2.model.dropout_rate = dropout;
            c2.optim.learning_rate = lr;
            c2.optim.batch_size = batch;
            Rng rng = rep_rng(cfg, r);
            auto [pool, test] = pool_and_test(c2, full_ptr, rng.split("data"));
            runs[r] = run_pe_row(c2, pool, test, rng.split("pe_row"));
        });
        return runs;
    };
    auto default_runs = final_runs(cfg.optim.learning_rate, cfg.model.dropout_rate,
                                   cfg.optim.batch_size);
    auto tuned_runs = final_runs(grid[tuned].lr, grid[tuned].dropout, grid[tuned].batch);

    auto out = open_out(cfg, "summary.csv");
    out << "row,learning_rate,dropout,batch_size,val_loss,acc_mean,acc_std\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << "grid," << fmt_raw(grid[i].lr) << ',' << fmt_raw(grid[i].dropout) << ','
            << grid[i].batch << ',' << fmt_raw(grid[i].val_loss) << ",,\n";
    }
    auto final_row = [&](const char* name, double lr, double dr, std::size_t bs,
                         const std::vector<RunOutcome>& runs) {
        std::vector<double> acc;
        for (const auto& r : runs) acc.push_back(r.accuracy);
        Aggregate a = aggregate(acc);
        out << name << ',' << fmt_raw(lr) << ',' << fmt_raw(dr) << ',' << bs << ",,"
            << fmt_acc(a.mean) << ',' << fmt_acc(a.stddev) << '\n';
    };
    final_row("default", cfg.optim.learning_rate, cfg.model.dropout_rate, cfg.optim.batch_size,
              default_runs);
    final_row("tuned", grid[tuned].lr, grid[tuned].dropout, grid[tuned].batch, tuned_runs);

    auto runs_out = open_out(cfg, "runs.csv");
    write_runs_header(runs_out, "setting");
    for (int r = 0; r < cfg.repetitions; ++r) write_run_row(runs_out, r, "default", default_runs[r]);
    for (int r = 0; r < cfg.repetitions; ++r) write_run_row(runs_out, r, "tuned", tuned_runs[r]);
    return 0;
}

int cmd_stop_analysis(const ExperimentConfig& cfg) {
    auto full = maybe_load_csv(cfg);
    const Dataset* full_ptr = full ? &*full : nullptr;

    Rng rng = rep_rng(cfg, 0);
    auto [pool, test] = pool_and_test(cfg, full_ptr, rng.split("data"));
    ModelSpec spec = resolve_model(cfg, pool);

    PeResult pe = estimate_pe_stop_epoch(spec, pool, cfg.pe_folds, cfg.optim, rng.split("pe"));
    ParameterVector init = init_params(spec, rng.split("init"));

    struct EpochRow {
        double test_loss;
        double test_acc;
        double eb_stat;
    };
    std::vector<EpochRow> rows;
    rows.reserve(cfg.optim.max_epochs);
    int eb_stop = 0;
    ParameterVector params_at_pe, params_at_eb, params_last;
    auto observer = [&](int epoch, const ParameterVector& params) {
        auto pred = predict(spec, params, test);
        auto [stop, stat] = eb_should_stop(spec, params, pool);
        rows.push_back({cross_entropy(pred), accuracy(pred), stat});
        if (epoch == pe.pe_stop_epoch) params_at_pe = params;
        if (stop && eb_stop == 0) {
            eb_stop = epoch;
            params_at_eb = params;
        }
        params_last = params;
    };
    train(spec, init, pool, cfg.optim, fixed_epoch_criterion(cfg.optim.max_epochs),
          rng.split("train"), observer);

    int best_test_epoch = 1;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].test_loss < rows[best_test_epoch - 1].test_loss)
            best_test_epoch = static_cast<int>(i + 1);
    if (eb_stop == 0) {
        eb_stop = cfg.optim.max_epochs;  // criterion never fired
        params_at_eb = params_last;
    }

    auto trace_out = open_out(cfg, "trace_0.csv");
    trace_out << "epoch,test_loss,test_accuracy,eb_statistic\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
        trace_out << (i + 1) << ',' << fmt_raw(rows[i].test_loss) << ','
                  << fmt_raw(rows[i].test_acc) << ',' << fmt_raw(rows[i].eb_stat) << '\n';

    write_histogram(cfg, "histogram_pe.csv",
                    confidence_histogram(predict(spec, params_at_pe, test), cfg.bins));
    write_histogram(cfg, "histogram_eb.csv",
                    confidence_histogram(predict(spec, params_at_eb, test), cfg.bins));

    auto h_pe = confidence_histogram(predict(spec, params_at_pe, test), cfg.bins);
    auto h_eb = confidence_histogram(predict(spec, params_at_eb, test), cfg.bins);
    auto out = open_out(cfg, "summary.csv");
    out << "quantity,value\n";
    out << "pe_stop_epoch," << pe.pe_stop_epoch << '\n';
    out << "eb_stop_epoch," << eb_stop << '\n';
    out << "best_test_epoch," << best_test_epoch << '\n';
    out << "accuracy_at_pe," << fmt_raw(rows[pe.pe_stop_epoch - 1].test_acc) << '\n';
    out << "accuracy_at_eb," << fmt_raw(rows[eb_stop - 1].test_acc) << '\n';
    out << "accuracy_at_best," << fmt_raw(rows[best_test_epoch - 1].test_acc) << '\n';
    out << "confidence_gap_at_pe," << fmt_raw(h_pe.gap) << '\n';
    out << "confidence_gap_at_eb," << fmt_raw(h_eb.gap) << '\n';
    return 0;
}

int cmd_size_sweep(const ExperimentConfig& cfg) {
    if (cfg.size_fractions.empty())
        throw std::invalid_argument("size-sweep: size fractions list must be nonempty");
    auto full = maybe_load_csv(cfg);
    const Dataset* full_ptr = full ? &*full : nullptr;

    std::vector<double> fractions = cfg.size_fractions;
    std::sort(fractions.begin(), fractions.end());

    struct Cell {
        std::vector<RunOutcome> good_pe, val_01, val_03;
    };
    std::vector<Cell> cells(fractions.size());
    for (auto& c : cells) {
        c.good_pe.resize(cfg.repetitions);
        c.val_01.resize(cfg.repetitions);
        c.val_03.resize(cfg.repetitions);
    }

    parallel_for(cfg.repetitions, cfg.jobs, [&](int r) {
        Rng rng = rep_rng(cfg, r);
        auto [pool, test] = pool_and_test(cfg, full_ptr, rng.split("data"));
        for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
            double f = fractions[fi];
            Rng frng = rng.split("fraction").split(fi);
            Dataset sub = f >= 1.0 ? pool : stratified_holdout(pool, f, frng.split("size")).first;

            // Good-PE: good initialization, all samples, PE schedule
            {
                ModelSpec spec = resolve_model(cfg, sub);
                FogipConfig fc = make_fogip_config(cfg, frng);
                FogipResult good = fogip(sub, fc, spec, frng.split("fogip"));
                PeResult pe =
                    estimate_pe_stop_epoch(spec, sub, cfg.pe_folds, cfg.optim, frng.split("pe"));
                TrainResult res = train(spec, good.good_params, sub, cfg.optim,
                                        fixed_epoch_criterion(pe.pe_stop_epoch),
                                        frng.split("train"));
                cells[fi].good_pe[r] =
                    outcome_of(spec, res.params, test, cfg.bins, res.trace.stop_epoch);
            }
            // Val-based at two dropout rates
            for (double dropout : {0.1, 0.3}) {
                ExperimentConfig c2 = cfg;
                c2.model.dropout_rate = dropout;
                RunOutcome out = run_val_row(c2, sub, test, cfg.train_frac,
                                             frng.split(dropout < 0.2 ? "val01" : "val03"));
                (dropout < 0.2 ? cells[fi].val_01 : cells[fi].val_03)[r] = out;
            }
        }
    });

    auto runs_out = open_out(cfg, "runs.csv");
    write_runs_header(runs_out, "fraction,method");
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        std::string f = fmt("%g", fractions[fi]);
        for (int r = 0; r < cfg.repetitions; ++r) {
            write_run_row(runs_out, r, f + ",good_pe", cells[fi].good_pe[r]);
            write_run_row(runs_out, r, f + ",val_dropout_0.1", cells[fi].val_01[r]);
            write_run_row(runs_out, r, f + ",val_dropout_0.3", cells[fi].val_03[r]);
        }
    }

    auto summary_out = open_out(cfg, "summary.csv");
    write_summary_header(summary_out, "fraction,method");
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        std::string f = fmt("%g", fractions[fi]);
        write_summary_row(summary_out, f + ",good_pe", cells[fi].good_pe);
        write_summary_row(summary_out, f + ",val_dropout_0.1", cells[fi].val_01);
        write_summary_row(summary_out, f + ",val_dropout_0.3", cells[fi].val_03);
    }
    return 0;
}

int cmd_pe_estimate(const ExperimentConfig& cfg) {
    auto full = maybe_load_csv(cfg);
    const Dataset* full_ptr = full ? &*full : nullptr;
    Rng rng = rep_rng(cfg, 0);
    auto [pool, test] = pool_and_test(cfg, full_ptr, rng.split("data"));
    ModelSpec spec = resolve_model(cfg, pool);
    PeResult pe = estimate_pe_stop_epoch(spec, pool, cfg.pe_folds, cfg.optim, rng.split("pe"));

    auto out = open_out(cfg, "summary.csv");
    out << "fold,stop_epoch\n";
    for (std::size_t i = 0; i < pe.fold_stop_epochs.size(); ++i)
        out << (i + 1) << ',' << pe.fold_stop_epochs[i] << '\n';
    out << "pe," << pe.pe_stop_epoch << '\n';
    std::printf("pe_stop_epoch=%d\n", pe.pe_stop_epoch);
    return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
    auto full = maybe_load_csv(cfg);
    const Dataset* full_ptr = full ? &*full : nullptr;
    Rng rng = rep_rng(cfg, 0);
    auto [pool, test] = pool_and_test(cfg, full_ptr, rng.split("data"));
    ModelSpec spec = resolve_model(cfg, pool);

    Dataset train_set = pool;
    Dataset val_set;
    StopCriterion crit;
    if (cfg.criterion == "val") {
        if (!(cfg.train_frac > 0.0 && cfg.train_frac < 1.0))
            throw std::invalid_argument("train: criterion=val requires train_frac in (0,1)");
        std::tie(train_set, val_set) = stratified_holdout(pool, cfg.train_frac, rng.split("tv"));
        crit = val_based_criterion(val_set);
    } else if (cfg.criterion == "pe") {
        PeResult pe = estimate_pe_stop_epoch(spec, pool, cfg.pe_folds, cfg.optim, rng.split("pe"));
        crit = fixed_epoch_criterion(pe.pe_stop_epoch);
    } else if (cfg.criterion == "eb") {
        crit = eb_criterion();
    } else if (cfg.criterion == "fixed") {
        crit = fixed_epoch_criterion(cfg.fixed_epoch);
    } else {
        throw std::invalid_argument("train: unknown criterion \"" + cfg.criterion + "\"");
    }

    ParameterVector init = init_params(spec, rng.split("init"));
    TrainResult res = train(spec, init, train_set, cfg.optim, crit, rng.split("train"));

    auto trace_out = open_out(cfg, "trace_0.csv");
    trace_out << "epoch,train_loss,val_loss,eb_statistic\n";
    for (const auto& rec : res.trace.records) {
        trace_out << rec.epoch << ',' << fmt_raw(rec.train_loss) << ','
                  << (rec.val_loss ? fmt_raw(*rec.val_loss) : "") << ','
                  << (rec.eb_statistic ? fmt_raw(*rec.eb_statistic) : "") << '\n';
    }

    RunOutcome out = outcome_of(spec, res.params, test, cfg.bins, res.trace.stop_epoch);
    auto summary_out = open_out(cfg, "summary.csv");
    write_summary_header(summary_out, "criterion");
    write_summary_row(summary_out, cfg.criterion, {out});
    std::printf("stop_epoch=%d accuracy=%.4f loss=%.4f ece=%.4f oe=%.4f\n", out.stop_epoch,
                out.accuracy, out.loss, out.ece, out.oe);
    return 0;
}

}  // namespace lowres
