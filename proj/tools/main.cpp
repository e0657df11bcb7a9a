#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wisense/chansim.hpp"
#include "wisense/cli_support.hpp"
#include "wisense/csi_io.hpp"
#include "wisense/estimator/dataset.hpp"
#include "wisense/estimator/model.hpp"
#include "wisense/estimator/scenario.hpp"
#include "wisense/estimator/train.hpp"
#include "wisense/infotheory.hpp"
#include "wisense/preprocess.hpp"
#include "wisense/resolution.hpp"

namespace cli = wisense::cli;
namespace est = wisense::estimator;
namespace fs = std::filesystem;

namespace {

// exit codes: 0 success, 2 config error, 3 runtime error, 4 check failure
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitCheckFailed = 4;

cli::RunConfig load_config(const std::string& path) {
  return path.empty() ? cli::RunConfig{} : cli::RunConfig::parse_file(path);
}

void apply_override(cli::RunConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (!value.empty()) cfg.values[key] = value;
}

std::string require_string(const cli::RunConfig& cfg, const std::string& key) {
  const std::string v = cfg.get_string(key, "");
  if (v.empty())
    throw cli::config_error("missing required config key '" + key + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// ---- analyze-resolution ----

int cmd_analyze_resolution(cli::RunConfig& cfg, const std::string& out_dir) {
  using namespace wisense;
  const int n_tx = static_cast<int>(cfg.get_int("res.n_tx", 3));
  const int n_rx = static_cast<int>(cfg.get_int("res.n_rx", 3));
  const double carrier = cfg.get_double("res.carrier_hz", 5.32e9);
  const double bandwidth = cfg.get_double("res.bandwidth_hz", 40e6);
  const double spacing = cfg.get_double("res.spacing_wl", 0.5);
  const double d_rt = cfg.get_double("res.d_rt_m", 7.0);
  const double theta_r = cfg.get_double("res.theta_r_rad", 0.0);
  const double l_r = cfg.get_double("res.target_range_m", 3.0);
  const double L = cfg.get_double("res.sum_path_m", 10.0);
  cfg.reject_unknown();

  const ArrayGeometry geom =
      ArrayGeometry::from_carrier(n_tx, n_rx, carrier, bandwidth, d_rt, spacing);
  const double d_theta = resolution::angular_resolution(geom, theta_r);
  const double d_sum = resolution::sum_path_resolution(geom);
  const double d_range = resolution::range_resolution(geom, L, theta_r);
  const double d_total =
      resolution::total_spatial_resolution(geom, L, theta_r, l_r);

  std::printf("%-22s %s\n", "quantity", "value");
  std::printf("%-22s %.6g rad\n", "angular_resolution", d_theta);
  std::printf("%-22s %.6g m\n", "sum_path_resolution", d_sum);
  std::printf("%-22s %.6g m\n", "range_resolution", d_range);
  std::printf("%-22s %.6g m\n", "spatial_resolution", d_total);

  if (!out_dir.empty()) {
    cli::OutputDir out(out_dir);
    cli::write_csv(out.file("resolution.csv"),
                   {"quantity", "value", "unit"},
                   {{"angular_resolution", cli::format_double(d_theta), "rad"},
                    {"sum_path_resolution", cli::format_double(d_sum), "m"},
                    {"range_resolution", cli::format_double(d_range), "m"},
                    {"spatial_resolution", cli::format_double(d_total), "m"}});
    out.commit(cfg);
  }
  return kExitOk;
}

// ---- simulate ----

est::ScenarioConfig scenario_from_config(const cli::RunConfig& cfg) {
  est::ScenarioConfig sc;
  sc.seed = static_cast<std::uint64_t>(cfg.get_int("sim.seed", 1));
  sc.duration = cfg.get_double("sim.duration", 6.0);
  sc.truth_rate = cfg.get_double("sim.truth_rate", 30.0);
  sc.n_keypoints =
      static_cast<int>(cfg.get_int("sim.n_keypoints", est::kDefaultKeypoints));
  sc.target_amp = cfg.get_double("sim.target_amp", 0.05);
  sc.noise_std = cfg.get_double("sim.noise_std", 0.01);
  sc.cluster_radius = cfg.get_double("sim.cluster_radius", 0.3);
  sc.wander = cfg.get_double("sim.wander", 0.8);
  sc.center.x = cfg.get_double("sim.center_x", 3.5);
  sc.center.y = cfg.get_double("sim.center_y", 2.2);
  return sc;
}

int cmd_simulate(cli::RunConfig& cfg, const std::string& out_dir) {
  const est::ScenarioConfig scfg = scenario_from_config(cfg);
  cfg.reject_unknown();

  cli::OutputDir out(out_dir);
  const est::Scenario sc = est::make_scenario(scfg);
  const wisense::CsiSequence seq =
      wisense::chansim::synthesize_sequence(sc.scene, scfg.duration, false);
  wisense::io::write_csis(out.file("csi.csis"), seq);
  est::write_truth_csv(out.file("truth.csv"), sc.truth_records());
  out.commit(cfg);
  std::printf("simulate: %zu packets, %s\n", seq.frames.size(),
              out.file("csi.csis").c_str());
  return kExitOk;
}

// ---- preprocess ----

int cmd_preprocess(cli::RunConfig& cfg, const std::string& out_dir) {
  using namespace wisense;
  const std::string input = require_string(cfg, "pre.input");
  preprocess::PreprocessConfig pc;
  pc.n_ref = static_cast<int>(cfg.get_int("pre.n_ref", 1));
  pc.kappa = cfg.get_double("pre.kappa", 100.0);
  const std::string mode = cfg.get_string("pre.filter", "sliding_mean");
  if (mode == "sliding_mean")
    pc.filter.mode = preprocess::FilterMode::SlidingMean;
  else if (mode == "single_pole")
    pc.filter.mode = preprocess::FilterMode::SinglePole;
  else
    throw cli::config_error("pre.filter: expected sliding_mean or single_pole");
  pc.filter.window_seconds = cfg.get_double("pre.window_seconds", 1.0);
  pc.filter.cutoff_hz = cfg.get_double("pre.cutoff_hz", 2.0);
  cfg.reject_unknown();

  cli::OutputDir out(out_dir);
  const CsiSequence seq = io::read_csis(input);
  int ref = -1;
  const io::DynamicTensorSeries tensors =
      preprocess::run_pipeline_tensors(seq, pc, &ref);
  io::write_csid(out.file("dynamic.csid"), tensors);
  out.commit(cfg);
  std::printf("preprocess: reference element %d, %zu packets, %s\n", ref,
              tensors.n_packets(), out.file("dynamic.csid").c_str());
  return kExitOk;
}

// ---- verify-infotheory ----

int cmd_verify_infotheory(cli::RunConfig& cfg, const std::string& out_dir) {
  using namespace wisense::infotheory;
  const int sources = static_cast<int>(cfg.get_int("it.sources", 20));
  const int n = static_cast<int>(cfg.get_int("it.n", 4));
  const int m_size = static_cast<int>(cfg.get_int("it.m_size", 3));
  const int mhat_size = static_cast<int>(cfg.get_int("it.mhat_size", 3));
  const int states = static_cast<int>(cfg.get_int("it.states", 2));
  const int trials = static_cast<int>(cfg.get_int("it.trials", 100));
  const double rate_margin = cfg.get_double("it.rate_margin", 0.5);
  const std::vector<std::string> eps_list =
      split_list(cfg.get_string("it.epsilons", "0.1,0.2,0.3"));
  cfg.reject_unknown();
  if (sources < 1) throw cli::config_error("it.sources must be >= 1");

  cli::OutputDir out(out_dir);
  std::vector<std::vector<std::string>> rows;
  std::size_t total_violations = 0;
  for (int s = 0; s < sources; ++s) {
    const JointSource src =
        make_random_source(static_cast<std::uint64_t>(s + 1), m_size,
                           mhat_size, states);
    for (const std::string& eps_s : eps_list) {
      const double eps = std::stod(eps_s);
      const TypicalParams params = hamming_params(n, eps, m_size, mhat_size);
      const LemmaReport l1 = verify_lemma1(src, params);
      const LemmaReport l2 = verify_lemma2(src, params);
      const double rate = src.mutual_information() + 3.0 * eps + rate_margin;
      const DistortionBounds b = distortion_bound(src, params, rate);
      const CodingStats iid = simulate_random_coding(
          src, params, rate, static_cast<std::size_t>(trials),
          static_cast<std::uint64_t>(s + 1), false);
      const CodingStats temporal = simulate_random_coding(
          src, params, rate, static_cast<std::size_t>(trials),
          static_cast<std::uint64_t>(s + 1), true);
      const std::size_t violations = l1.violations + l2.violations;
      total_violations += violations;
      rows.push_back({std::to_string(s), std::to_string(n),
                      cli::format_double(eps),
                      std::to_string(l1.enumerated + l2.enumerated),
                      std::to_string(violations),
                      cli::format_double(b.bound_iid),
                      cli::format_double(b.bound_temporal),
                      cli::format_double(iid.mean_distortion),
                      cli::format_double(temporal.mean_distortion)});
    }
  }
  cli::write_csv(out.file("infotheory.csv"),
                 {"source", "n", "epsilon", "pairs_checked", "violations",
                  "bound_iid", "bound_temporal", "mc_mean_iid",
                  "mc_mean_temporal"},
                 rows);
  out.commit(cfg);
  std::printf("verify-infotheory: %d sources, %zu total violations\n", sources,
              total_violations);
  return total_violations == 0 ? kExitOk : kExitCheckFailed;
}

// ---- make-dataset ----

int cmd_make_dataset(cli::RunConfig& cfg, const std::string& out_dir) {
  const std::string csi = require_string(cfg, "ds.csi");
  const std::string truth = require_string(cfg, "ds.truth");
  const int seq_id = static_cast<int>(cfg.get_int("ds.sequence_id", 0));
  cfg.reject_unknown();

  cli::OutputDir out(out_dir);
  const wisense::io::DynamicTensorSeries tensors = wisense::io::read_csid(csi);
  const std::vector<est::TruthRecord> truths = est::read_truth_csv(truth);
  const std::vector<est::ToySample> samples =
      est::window_csi(tensors, truths, seq_id);
  if (samples.empty())
    throw std::runtime_error("make-dataset: no usable samples");
  est::write_dataset(out.file("dataset.toyd"), samples);
  out.commit(cfg);
  std::printf("make-dataset: %zu samples, %s\n", samples.size(),
              out.file("dataset.toyd").c_str());
  return kExitOk;
}

// ---- train ----

std::vector<est::Block> load_blocks(const std::vector<std::string>& paths,
                                    int block_len) {
  std::vector<est::ToySample> all;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::vector<est::ToySample> s = est::read_dataset(paths[i]);
    // keep blocks from different files apart even if ids collide
    for (auto& smp : s)
      smp.sequence_id += static_cast<int>(i) * 1000000;
    all.insert(all.end(), s.begin(), s.end());
  }
  return est::segment_blocks(all, block_len);
}

int cmd_train(cli::RunConfig& cfg, const std::string& out_dir) {
  const std::string mode = cfg.get_string("train.mode", "two-stage");
  const std::vector<std::string> data =
      split_list(require_string(cfg, "train.data"));
  const std::vector<std::string> val = split_list(cfg.get_string("train.val", ""));
  const int block_len =
      static_cast<int>(cfg.get_int("train.block_len", est::kDefaultBlockLen));

  est::TrainConfig tc;
  tc.a = cfg.get_double("train.a", tc.a);
  tc.b = cfg.get_double("train.b", tc.b);
  tc.c_start = cfg.get_double("train.c_start", tc.c_start);
  tc.c_end = cfg.get_double("train.c_end", tc.c_end);
  tc.learning_rate = cfg.get_double("train.lr", tc.learning_rate);
  tc.epochs = static_cast<int>(cfg.get_int("train.epochs", 40));
  tc.batch_blocks = static_cast<int>(cfg.get_int("train.batch_blocks", 16));
  tc.seed = static_cast<std::uint64_t>(cfg.get_int("train.seed", 1));
  est::TrainConfig tc2 = tc;
  tc2.learning_rate = cfg.get_double("train.lr2", 0.002);
  tc2.epochs = static_cast<int>(cfg.get_int("train.epochs2", tc.epochs));

  est::ModelConfig mc;
  mc.max_seq_len = static_cast<int>(cfg.get_int("train.max_seq_len", block_len));
  cfg.reject_unknown();

  cli::OutputDir out(out_dir);
  const std::vector<est::Block> train_blocks = load_blocks(data, block_len);
  const std::vector<est::Block> val_blocks = load_blocks(val, block_len);
  if (train_blocks.empty())
    throw std::runtime_error("train: no full blocks in training data");
  if (!train_blocks.front().samples.empty()) {
    mc.rows = train_blocks.front().samples.front().rows;
    mc.n_sub = train_blocks.front().samples.front().n_sub;
    mc.n_keypoints =
        static_cast<int>(train_blocks.front().samples.front().truth_pose.size());
  }

  std::vector<est::EpochStats> history;
  est::Model model(mc);
  model.init_weights(tc.seed);
  if (mode == "memoryless") {
    model.cfg.temporal = false;
    history = est::train(model, train_blocks, val_blocks, tc);
  } else if (mode == "temporal") {
    model.cfg.temporal = true;
    history = est::train(model, train_blocks, val_blocks, tc);
  } else if (mode == "two-stage") {
    history = est::two_stage_train(model, train_blocks, val_blocks, tc, tc2);
  } else {
    throw cli::config_error(
        "train.mode: expected memoryless, temporal or two-stage");
  }

  est::save_weights(out.file("weights.toyw"), model);
  std::vector<std::vector<std::string>> rows;
  for (const auto& st : history)
    rows.push_back({std::to_string(st.epoch), cli::format_double(st.c),
                    cli::format_double(st.train_loss),
                    cli::format_double(st.val_loss)});
  cli::write_csv(out.file("history.csv"),
                 {"epoch", "c", "train_loss", "val_loss"}, rows);
  out.commit(cfg);
  std::printf("train: %s, %zu blocks, final val loss %.6g\n", mode.c_str(),
              train_blocks.size(), history.back().val_loss);
  return kExitOk;
}

// ---- evaluate ----

int cmd_evaluate(cli::RunConfig& cfg, const std::string& out_dir) {
  const std::string weights = require_string(cfg, "eval.weights");
  const std::vector<std::string> data =
      split_list(require_string(cfg, "eval.data"));
  const int block_len =
      static_cast<int>(cfg.get_int("eval.block_len", est::kDefaultBlockLen));
  cfg.reject_unknown();

  cli::OutputDir out(out_dir);
  const est::Model model = est::load_weights(weights);
  const std::vector<est::Block> blocks = load_blocks(data, block_len);
  if (blocks.empty()) throw std::runtime_error("evaluate: no full blocks");
  const est::EvalReport rep = est::evaluate(model, blocks);

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : rep.rows)
    rows.push_back({std::to_string(r.timestamp_index),
                    cli::format_double(r.mean_loc_err),
                    cli::format_double(r.mean_pose_err)});
  cli::write_csv(out.file("metrics.csv"),
                 {"timestamp_index", "mean_loc_err_m", "mean_pose_err_m"},
                 rows);
  out.commit(cfg);
  std::printf("evaluate: mean loc err %.4f m, mean pose err %.4f m\n",
              rep.overall_loc_err, rep.overall_pose_err);
  return kExitOk;
}

// ---- report ----

int cmd_report(cli::RunConfig& cfg, const std::string& out_dir) {
  const std::vector<std::string> metrics =
      split_list(cfg.get_string("rep.metrics", ""));
  const std::vector<std::string> histories =
      split_list(cfg.get_string("rep.history", ""));
  cfg.reject_unknown();
  if (metrics.empty() && histories.empty())
    throw cli::config_error("report: need rep.metrics and/or rep.history");

  cli::OutputDir out(out_dir);
  if (!metrics.empty()) {
    std::vector<cli::PlotSeries> loc, pose;
    for (const std::string& path : metrics) {
      const cli::CsvTable t = cli::read_csv(path);
      if (t.header !=
          std::vector<std::string>{"timestamp_index", "mean_loc_err_m",
                                   "mean_pose_err_m"})
        throw std::runtime_error("report: unexpected metric columns in " + path);
      cli::PlotSeries sl, sp;
      sl.label = sp.label = fs::path(path).parent_path().filename().string();
      if (sl.label.empty()) sl.label = sp.label = fs::path(path).stem().string();
      for (const auto& row : t.rows) {
        sl.points.push_back({std::stod(row[0]), std::stod(row[1])});
        sp.points.push_back({std::stod(row[0]), std::stod(row[2])});
      }
      loc.push_back(std::move(sl));
      pose.push_back(std::move(sp));
    }
    cli::svg_line_plot(out.file("error_vs_timestamp.svg"),
                       "mean localization error per timestamp",
                       "timestamp index in block", "error (m)", loc);
    cli::svg_line_plot(out.file("pose_error_vs_timestamp.svg"),
                       "mean keypoint error per timestamp",
                       "timestamp index in block", "error (m)", pose);
  }
  if (!histories.empty()) {
    std::vector<cli::PlotSeries> curves;
    for (const std::string& path : histories) {
      const cli::CsvTable t = cli::read_csv(path);
      if (t.header != std::vector<std::string>{"epoch", "c", "train_loss",
                                               "val_loss"})
        throw std::runtime_error("report: unexpected history columns in " + path);
      std::string base = fs::path(path).parent_path().filename().string();
      if (base.empty()) base = fs::path(path).stem().string();
      cli::PlotSeries tr, va;
      tr.label = base + " train";
      va.label = base + " val";
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        tr.points.push_back(
            {static_cast<double>(i), std::stod(t.rows[i][2])});
        va.points.push_back(
            {static_cast<double>(i), std::stod(t.rows[i][3])});
      }
      curves.push_back(std::move(tr));
      curves.push_back(std::move(va));
    }
    cli::svg_line_plot(out.file("loss_curves.svg"), "training loss",
                       "epoch (stages concatenated)", "loss", curves);
  }
  out.commit(cfg);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wisense: single-transceiver-pair Wi-Fi sensing toolkit"};
  app.set_version_flag("--version", std::string("wisense ") + cli::kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir;
  struct Override {
    std::string key;
    std::string value;
  };
  std::vector<Override> overrides;

  auto add_common = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--config", config_path, "key=value config file");
    auto* o = sub->add_option("--out", out_dir, "output directory");
    if (out_required) o->required();
    return sub;
  };
  auto add_override = [&](CLI::App* sub, const std::string& flag,
                          const std::string& key, const std::string& help) {
    overrides.push_back({key, ""});
    sub->add_option(flag, overrides.back().value, help);
  };
  overrides.reserve(32);  // stable addresses for CLI11 bindings

  CLI::App* res = add_common(
      app.add_subcommand("analyze-resolution",
                         "closed-form resolution table for an array geometry"),
      false);
  add_override(res, "--bandwidth", "res.bandwidth_hz", "bandwidth in Hz");
  add_override(res, "--theta", "res.theta_r_rad", "target angle in rad");

  CLI::App* sim = add_common(
      app.add_subcommand("simulate",
                         "synthesize a seeded CSI sequence with ground truth"),
      true);
  add_override(sim, "--seed", "sim.seed", "scenario seed");
  add_override(sim, "--duration", "sim.duration", "seconds of CSI");

  CLI::App* pre = add_common(
      app.add_subcommand("preprocess",
                         "extract dynamic CSI tensors from a CSIS file"),
      true);
  add_override(pre, "--input", "pre.input", "input .csis path");

  CLI::App* verify = add_common(
      app.add_subcommand("verify-infotheory",
                         "lemma/bound/Monte-Carlo checks over random sources"),
      true);
  add_override(verify, "--sources", "it.sources", "number of seeded sources");

  CLI::App* mkds = add_common(
      app.add_subcommand("make-dataset",
                         "window dynamic tensors against a truth sidecar"),
      true);
  add_override(mkds, "--csi", "ds.csi", "input .csid path");
  add_override(mkds, "--truth", "ds.truth", "truth sidecar CSV");

  CLI::App* train = add_common(
      app.add_subcommand("train", "train an estimator on TOYD datasets"), true);
  add_override(train, "--mode", "train.mode",
               "memoryless | temporal | two-stage");
  add_override(train, "--data", "train.data", "comma-separated .toyd paths");
  add_override(train, "--val", "train.val", "validation .toyd paths");

  CLI::App* eval = add_common(
      app.add_subcommand("evaluate",
                         "per-timestamp error table for trained weights"),
      true);
  add_override(eval, "--weights", "eval.weights", "trained .toyw path");
  add_override(eval, "--data", "eval.data", "comma-separated .toyd paths");

  CLI::App* report = add_common(
      app.add_subcommand("report", "render metric/history CSVs as SVG plots"),
      true);
  add_override(report, "--metrics", "rep.metrics",
               "comma-separated metrics.csv paths");
  add_override(report, "--history", "rep.history",
               "comma-separated history.csv paths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    cli::RunConfig cfg = load_config(config_path);
    for (const Override& o : overrides) apply_override(cfg, o.key, o.value);
    if (res->parsed()) return cmd_analyze_resolution(cfg, out_dir);
    if (sim->parsed()) return cmd_simulate(cfg, out_dir);
    if (pre->parsed()) return cmd_preprocess(cfg, out_dir);
    if (verify->parsed()) return cmd_verify_infotheory(cfg, out_dir);
    if (mkds->parsed()) return cmd_make_dataset(cfg, out_dir);
    if (train->parsed()) return cmd_train(cfg, out_dir);
    if (eval->parsed()) return cmd_evaluate(cfg, out_dir);
    if (report->parsed()) return cmd_report(cfg, out_dir);
    return kExitConfig;
  } catch (const cli::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
