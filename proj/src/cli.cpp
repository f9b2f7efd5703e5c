#include "hpcpred/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <limits>
#include <ostream>

#include "hpcpred/advisory.hpp"
#include "hpcpred/error.hpp"
#include "hpcpred/evaluate.hpp"
#include "hpcpred/report.hpp"
#include "hpcpred/synth.hpp"
#include "hpcpred/util.hpp"

namespace hpcpred {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> task_choices() {
  std::vector<std::string> v;
  for (auto t : kAllTasks) v.emplace_back(task_name(t));
  return v;
}

struct JobSource {
  std::string in_dir;
  std::string accounting;
  std::string roles;
  std::string jobs_csv;
  std::size_t min_jobs = 200;
  std::string sample = "all";
  std::int64_t window_start = std::numeric_limits<std::int64_t>::min();
  std::int64_t window_end = std::numeric_limits<std::int64_t>::max();
  std::string label_rule = "any";
  bool skip_errors = false;
};

void add_source(CLI::App* app, JobSource& s, bool allow_csv) {
  app->add_option("--in", s.in_dir, "directory holding 'accounting' and optional 'roles'");
  app->add_option("--accounting", s.accounting, "accounting log file");
  app->add_option("--roles", s.roles, "roles file (user,role per line)");
  if (allow_csv) app->add_option("--jobs", s.jobs_csv, "cleaned job table written by 'ingest'");
  app->add_option("--min-jobs", s.min_jobs, "drop users with fewer surviving jobs")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--sample", s.sample, "number of jobs to sample, or 'all'")->capture_default_str();
  app->add_option("--window-start", s.window_start, "earliest submission time (unix seconds)");
  app->add_option("--window-end", s.window_end, "end of the submission window, exclusive");
  app->add_option("--label-rule", s.label_rule, "failed label: any nonzero code, or resource kills only")
      ->capture_default_str()
      ->check(CLI::IsMember({"any", "resource-kill"}));
  app->add_option("--skip-errors", s.skip_errors, "skip unparseable lines instead of failing")->capture_default_str();
}

LabelRule label_rule(const JobSource& s) {
  return s.label_rule == "resource-kill" ? LabelRule::kResourceKill : LabelRule::kAnyNonzero;
}

RoleMap load_roles(const std::string& path) { return path.empty() ? RoleMap{} : parse_roles(read_file(path)); }

std::vector<JobRecord> load_jobs(const JobSource& s, std::uint64_t seed, std::ostream& err, bool verbose) {
  const int given = !s.in_dir.empty() + !s.accounting.empty() + !s.jobs_csv.empty();
  if (given != 1) throw UsageError("give exactly one of --in, --accounting or --jobs");
  if (!s.jobs_csv.empty()) return read_jobs_csv(read_file(s.jobs_csv));

  std::string accounting = s.accounting;
  std::string roles = s.roles;
  if (!s.in_dir.empty()) {
    accounting = (fs::path(s.in_dir) / "accounting").string();
    const auto r = fs::path(s.in_dir) / "roles";
    if (roles.empty() && fs::exists(r)) roles = r.string();
  }
  IngestConfig cfg;
  cfg.window_start = s.window_start;
  cfg.window_end = s.window_end;
  cfg.min_jobs_per_user = s.min_jobs;
  cfg.rng_seed = seed;
  cfg.label_rule = label_rule(s);
  if (s.sample != "all") {
    const auto n = parse_int(s.sample);
    if (!n || *n <= 0) throw UsageError("--sample must be a positive integer or 'all'");
    cfg.sample_size = static_cast<std::size_t>(*n);
  }
  const auto log = parse_accounting(read_file(accounting), s.skip_errors);
  CleanStats stats;
  auto jobs = clean_filter_sample(log.records, load_roles(roles), cfg, &stats);
  if (verbose) {
    err << "parsed " << log.records.size() << " records";
    if (!log.skipped_lines.empty()) err << " (skipped " << log.skipped_lines.size() << " bad lines)";
    err << "; dropped: window " << stats.outside_window << ", never started " << stats.never_started
        << ", missing request " << stats.missing_request << ", invalid usage " << stats.invalid_usage
        << ", below user threshold " << stats.below_user_threshold << "; kept " << stats.output << "\n";
  }
  return jobs;
}

struct HpFlags {
  double alpha = 0.5;
  double l1_ratio = 0.5;
  std::size_t folds = 5;
  std::string criterion = "aic";
  double l2 = 1.0;
  std::size_t n_trees = 100;
  std::string max_depth = "none";
};

void add_hp(CLI::App* app, HpFlags& h) {
  app->add_option("--alpha", h.alpha, "Ridge penalty")->capture_default_str()->check(CLI::NonNegativeNumber);
  app->add_option("--l1-ratio", h.l1_ratio, "elastic-net L1 share")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  app->add_option("--folds", h.folds, "elastic-net CV folds")->capture_default_str()->check(CLI::Range(2, 1000));
  app->add_option("--criterion", h.criterion, "LLIC information criterion")
      ->capture_default_str()
      ->check(CLI::IsMember({"aic", "bic"}));
  app->add_option("--l2", h.l2, "logistic L2 strength")->capture_default_str()->check(CLI::NonNegativeNumber);
  app->add_option("--n-trees", h.n_trees, "random forest size")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--max-depth", h.max_depth, "tree depth limit, or 'none'")->capture_default_str();
}

Hyperparameters to_hp(const HpFlags& h, std::uint64_t seed) {
  Hyperparameters hp;
  hp.ridge_alpha = h.alpha;
  hp.encv_l1_ratio = h.l1_ratio;
  hp.encv_folds = h.folds;
  hp.lars_criterion = h.criterion == "bic" ? InformationCriterion::kBic : InformationCriterion::kAic;
  hp.lr_l2 = h.l2;
  hp.rf_n_trees = h.n_trees;
  hp.seed = seed;
  if (h.max_depth != "none") {
    const auto d = parse_int(h.max_depth);
    if (!d || *d < 0) throw UsageError("--max-depth must be a non-negative integer or 'none'");
    hp.max_depth = static_cast<int>(*d);
  }
  return hp;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    write_file(path, text);
  }
}

std::string truth_csv(const SynthWorkload& w) {
  std::string s = "job_number,owner,role,expertise,demand_runtime_s,demand_mem_bytes,req_time_s,req_mem_bytes,failed,kill\n";
  for (const auto& j : w.jobs) {
    const auto& u = w.users[j.user_index];
    s += std::to_string(j.record.job_number) + "," + u.name + "," + std::string(role_name(u.role)) + "," +
         format_double(u.expertise) + "," + format_double(j.demand_runtime_s) + "," +
         format_double(j.demand_mem_bytes) + "," + format_double(j.req_time_s) + "," +
         format_double(j.req_mem_bytes) + "," + std::to_string(j.failed) + "," +
         (j.kill == KillReason::kMemory ? "memory" : j.kill == KillReason::kTime ? "time" : "none") + "\n";
  }
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hpcpred: HPC job usage and failure prediction toolkit", "hpcpred"};
  app.require_subcommand(1);
  app.allow_windows_style_options(false);

  std::uint64_t seed = 42;
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed, "random seed")->capture_default_str(); };

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic accounting log, roles file and ground truth");
  std::string synth_out;
  std::size_t synth_users = 50, synth_jobs = 400;
  double synth_margin = 0;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--users", synth_users, "number of users")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--jobs-per-user", synth_jobs, "jobs per user")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--margin", synth_margin, "fixed request margin for every job (0: latent model)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_seed(synth);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse, clean, filter and sample an accounting log");
  JobSource ingest_src;
  std::string ingest_out;
  add_source(ingest, ingest_src, false);
  ingest->add_option("--out", ingest_out, "cleaned job table (default: stdout)");
  add_seed(ingest);

  // featurize
  auto* featurize = app.add_subcommand("featurize", "export the feature table or one task's dataset");
  JobSource feat_src;
  std::string feat_out, feat_task;
  bool feat_user = true, feat_std = false;
  add_source(featurize, feat_src, true);
  featurize->add_option("--task", feat_task, "task dataset to export (default: all 18 columns)")
      ->check(CLI::IsMember(task_choices()));
  featurize->add_option("--user-features", feat_user, "include per-user aggregates")->capture_default_str();
  featurize->add_option("--standardize", feat_std, "z-score numeric columns")->capture_default_str();
  featurize->add_option("--out", feat_out, "output file (default: stdout)");
  add_seed(featurize);

  // train
  auto* train = app.add_subcommand("train", "fit one model on all jobs, or the default advisory store");
  JobSource train_src;
  HpFlags train_hp;
  std::string train_task, train_model_name, train_out, train_store;
  bool train_user = true;
  add_source(train, train_src, true);
  add_hp(train, train_hp);
  train->add_option("--task", train_task, "task")->check(CLI::IsMember(task_choices()));
  train->add_option("--model", train_model_name, "model name");
  train->add_option("--user-features", train_user, "include per-user aggregates")->capture_default_str();
  train->add_option("--out", train_out, "model file");
  train->add_option("--store", train_store, "write cpu.json, mem.json and failure.json here");
  add_seed(train);

  // predict
  auto* predict = app.add_subcommand("predict", "score jobs with a model, or advise on a submission");
  std::string pred_model, pred_jobs, pred_roles, pred_out, pred_store, pred_user, pred_role, pred_project;
  std::string pred_req_time, pred_req_mem;
  predict->add_option("--model", pred_model, "model file");
  predict->add_option("--jobs", pred_jobs, "accounting log of jobs to score");
  predict->add_option("--roles", pred_roles, "roles file");
  predict->add_option("--out", pred_out, "output file (default: stdout)");
  predict->add_option("--store", pred_store, "advisory model store directory");
  predict->add_option("--user", pred_user, "submitting user");
  predict->add_option("--role", pred_role, "role of the user if unseen in training");
  predict->add_option("--project", pred_project, "project");
  predict->add_option("--req-time", pred_req_time, "requested time: seconds or H:MM:SS");
  predict->add_option("--req-mem", pred_req_mem, "requested memory: bytes or with K/M/G/T suffix");
  add_seed(predict);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "run the with/without per-user features ablation grid");
  JobSource eval_src;
  HpFlags eval_hp;
  std::string eval_report, eval_format = "text", eval_tasks, eval_models, eval_timing = "on";
  double eval_train_fraction = 0.8;
  add_source(evaluate, eval_src, true);
  add_hp(evaluate, eval_hp);
  evaluate->add_option("--report", eval_report, "report file (default: stdout)");
  evaluate->add_option("--format", eval_format, "report format")->capture_default_str()->check(CLI::IsMember({"text", "csv"}));
  evaluate->add_option("--tasks", eval_tasks, "comma-separated tasks (default: all)");
  evaluate->add_option("--models", eval_models, "comma-separated model names (default: all)");
  evaluate->add_option("--train-fraction", eval_train_fraction, "holdout train share")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--timing", eval_timing, "record fit wall time")->capture_default_str()->check(CLI::IsMember({"on", "off"}));
  add_seed(evaluate);

  // report
  auto* report = app.add_subcommand("report", "re-render a csv report");
  std::string rep_in, rep_out, rep_format = "text";
  report->add_option("--in", rep_in, "csv report")->required();
  report->add_option("--out", rep_out, "output file (default: stdout)");
  report->add_option("--format", rep_format, "output format")->capture_default_str()->check(CLI::IsMember({"text", "csv"}));
  add_seed(report);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      SynthConfig cfg;
      cfg.seed = seed;
      cfg.n_users = synth_users;
      cfg.jobs_per_user_min = cfg.jobs_per_user_max = synth_jobs;
      if (synth_margin > 0) cfg.fixed_margin = synth_margin;
      const auto w = generate_workload(cfg);
      fs::create_directories(synth_out);
      write_file((fs::path(synth_out) / "accounting").string(), w.accounting);
      write_file((fs::path(synth_out) / "roles").string(), w.roles);
      write_file((fs::path(synth_out) / "truth.csv").string(), truth_csv(w));
      err << "wrote " << w.jobs.size() << " jobs for " << w.users.size() << " users to " << synth_out << "\n";
    } else if (ingest->parsed()) {
      const auto jobs = load_jobs(ingest_src, seed, err, true);
      emit(ingest_out, write_jobs_csv(jobs), out);
    } else if (featurize->parsed()) {
      const auto jobs = load_jobs(feat_src, seed, err, false);
      const auto rows = join_aggregates(jobs, compute_user_aggregates(jobs));
      if (feat_task.empty()) {
        emit(feat_out, export_feature_table(rows, FeatureEncoding::fit(jobs)), out);
      } else {
        const Task task = parse_task(feat_task);
        const Dataset ds = feat_user ? build_dataset(rows, task, true, feat_std) : build_dataset(jobs, task, feat_std);
        if (!ds.dropped_columns.empty()) {
          err << "dropped zero-variance columns:";
          for (const auto& c : ds.dropped_columns) err << " " << c;
          err << "\n";
        }
        emit(feat_out, export_dataset_csv(ds), out);
      }
    } else if (train->parsed()) {
      const Hyperparameters hp = to_hp(train_hp, seed);
      if (!train_store.empty()) {
        if (!train_task.empty() || !train_model_name.empty() || !train_out.empty())
          throw UsageError("--store trains the default models; do not combine with --task/--model/--out");
        const auto jobs = load_jobs(train_src, seed, err, false);
        train_default_store(jobs, hp).save(train_store);
        err << "wrote cpu.json, mem.json and failure.json to " << train_store << "\n";
      } else {
        if (train_task.empty() || train_model_name.empty() || train_out.empty())
          throw UsageError("train needs --task, --model and --out (or --store)");
        const Task task = parse_task(train_task);
        if (!is_known_model(task, train_model_name)) {
          std::string names;
          for (const auto& n : task_models(task)) names += " " + n;
          throw UsageError("unknown model '" + train_model_name + "' for " + train_task + "; choose from" + names);
        }
        const auto jobs = load_jobs(train_src, seed, err, false);
        const auto pm = train_persisted_model(jobs, task, train_model_name, train_user, hp);
        save_model(pm, train_out);
      }
    } else if (predict->parsed()) {
      if (!pred_store.empty()) {
        if (pred_user.empty() || pred_req_time.empty() || pred_req_mem.empty())
          throw UsageError("advisory mode needs --user, --req-time and --req-mem");
        Submission s;
        s.owner = pred_user;
        s.project = pred_project;
        if (!pred_role.empty()) s.role = parse_role(pred_role);
        const auto t = parse_duration(pred_req_time);
        const auto m = parse_size(pred_req_mem);
        if (!t || !m) throw UsageError("could not parse --req-time or --req-mem");
        s.req_time_s = *t;
        s.req_mem_bytes = *m;
        const auto store = ModelStore::load(pred_store);
        emit(pred_out, format_advisory(s, predict_for_submission(store, s)) + "\n", out);
      } else {
        if (pred_model.empty() || pred_jobs.empty()) throw UsageError("predict needs --model and --jobs (or --store)");
        const auto pm = load_model(pred_model);
        const RoleMap roles = load_roles(pred_roles);
        const auto log = parse_accounting(read_file(pred_jobs));
        std::string text;
        for (const auto& rec : log.records) {
          text += std::to_string(rec.job_number);
          try {
            JobRecord job = to_job_record(rec, roles);
            if (!roles.contains(job.owner))
              if (auto it = pm.context.user_roles.find(job.owner); it != pm.context.user_roles.end()) job.role = it->second;
            const auto score = score_job(pm, job);
            if (is_classification(pm.model.task))
              text += " " + format_fixed(score.value, 0) + " " + format_double(score.probability);
            else
              text += " " + format_double(score.value);
            if (score.cold_start) text += " cold-start";
          } catch (const MissingRequest&) {
            text += " NA";
          }
          text += "\n";
        }
        emit(pred_out, text, out);
      }
    } else if (evaluate->parsed()) {
      ExperimentConfig cfg;
      cfg.split.seed = seed;
      cfg.split.train_fraction = eval_train_fraction;
      cfg.hp = to_hp(eval_hp, seed);
      cfg.measure_time = eval_timing == "on";
      if (!eval_tasks.empty()) {
        cfg.tasks.clear();
        for (const auto& t : split(eval_tasks, ',')) {
          const auto choices = task_choices();
          if (std::find(choices.begin(), choices.end(), t) == choices.end())
            throw UsageError("unknown task '" + t + "'");
          cfg.tasks.push_back(parse_task(t));
        }
      }
      if (!eval_models.empty()) {
        const auto wanted = split(eval_models, ',');
        for (const auto& w : wanted) {
          bool known = false;
          for (auto t : kAllTasks) known = known || is_known_model(t, w);
          if (!known) throw UsageError("unknown model '" + w + "'");
        }
        for (auto t : cfg.tasks) {
          std::vector<std::string> chosen;
          for (const auto& n : task_models(t))
            if (std::find(wanted.begin(), wanted.end(), n) != wanted.end()) chosen.push_back(n);
          if (chosen.empty()) throw UsageError("no selected model applies to " + std::string(task_name(t)));
          cfg.models[t] = chosen;
        }
      }
      const auto jobs = load_jobs(eval_src, seed, err, false);
      const auto rep = run_experiment(jobs, cfg);
      emit(eval_report, render_report(rep, parse_report_format(eval_format)), out);
    } else if (report->parsed()) {
      const auto rep = parse_report_csv(read_file(rep_in));
      emit(rep_out, render_report(rep, parse_report_format(rep_format)), out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace hpcpred
