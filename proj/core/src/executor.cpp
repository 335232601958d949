#include "cameo/executor.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <thread>

#include "cameo/cache.hpp"
#include "cameo/errors.hpp"
#include "cameo/provenance.hpp"

namespace cameo {

const char* to_string(TaskState s) {
  switch (s) {
    case TaskState::Pending: return "Pending";
    case TaskState::Ready: return "Ready";
    case TaskState::Running: return "Running";
    case TaskState::Succeeded: return "Succeeded";
    case TaskState::Failed: return "Failed";
    case TaskState::Retrying: return "Retrying";
    case TaskState::FailedPermanent: return "FailedPermanent";
    case TaskState::Skipped: return "Skipped";
    case TaskState::Cached: return "Cached";
  }
  return "?";
}

bool is_terminal(TaskState s) {
  return s == TaskState::Succeeded || s == TaskState::FailedPermanent || s == TaskState::Skipped ||
         s == TaskState::Cached;
}

fs::path default_workdir() {
  if (const char* env = std::getenv("CAMEO_WORKDIR"); env && *env) return env;
  return fs::current_path() / "cameo-work";
}

// ---- payloads and tags ----------------------------------------------------

json task_payload(const WorkflowSpec& spec, const ProcessDef& process, const Registry& registry,
                  const json& inputs, const fs::path& data_dir) {
  const json all = spec.params_for(process);
  json params = json::object();
  if (process.is_builtin()) {
    const auto* contract = registry.contract(process.builtin);
    if (!contract) throw SchemaError("unknown operation '" + process.builtin + "'");
    for (const auto& p : contract->params) {
      if (!all.contains(p.name)) {
        if (p.required) throw SchemaError("process '" + process.name + "': missing parameter '" + p.name + "'");
        continue;
      }
      const json& v = all[p.name];
      if (p.file) {
        if (!v.is_string()) throw SchemaError("parameter '" + p.name + "' must be a path");
        fs::path path = v.get<std::string>();
        if (path.is_relative()) path = data_dir / path;
        std::error_code ec;
        if (!fs::is_regular_file(path, ec)) throw IoError("parameter '" + p.name + "': no file " + path.string());
        params[p.name] = make_file_ref(path);
      } else {
        params[p.name] = v;
      }
    }
  } else {
    params = all;
  }
  return {{"inputs", inputs}, {"params", params}};
}

namespace {

const json* find_key(const json& v, const std::string& key) {
  if (v.is_object()) {
    if (auto it = v.find(key); it != v.end() && it->is_string()) return &*it;
    for (const auto& child : v) {
      if (child.is_structured())
        if (const json* hit = find_key(child, key)) return hit;
    }
  } else if (v.is_array()) {
    for (const auto& child : v) {
      if (!child.is_structured()) break;
      if (const json* hit = find_key(child, key)) return hit;
    }
  }
  return nullptr;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_number(v.get<double>());
  return v.dump();
}

}  // namespace

std::string render_tag(const std::string& tmpl, const PlannedTask& task, const json& payload) {
  static const std::regex re(R"(\{([A-Za-z_][A-Za-z0-9_]*)\})");
  static const std::map<std::string, std::vector<std::string>> kTyped = {
      {"site", {"site_id"}}, {"record", {"site_id"}}, {"battery", {"config_id", "battery_id"}},
      {"set", {"set_id"}},   {"tree", {"tree_id"}}};
  const json& inputs = payload.contains("inputs") ? payload["inputs"] : json::object();
  const json& params = payload.contains("params") ? payload["params"] : json::object();
  std::string out;
  auto last = tmpl.cbegin();
  for (auto it = std::sregex_iterator(tmpl.begin(), tmpl.end(), re); it != std::sregex_iterator(); ++it) {
    out.append(last, tmpl.cbegin() + it->position());
    last = tmpl.cbegin() + it->position() + it->length();
    const std::string name = (*it)[1].str();
    std::optional<std::string> value;
    if (name == "process") {
      value = task.process;
    } else if (name == "ordinal") {
      value = std::to_string(task.ordinal);
    } else if (auto t = kTyped.find(name); t != kTyped.end()) {
      for (const auto& key : t->second)
        if (const json* hit = find_key(inputs, key)) {
          value = hit->get<std::string>();
          break;
        }
    } else if (inputs.contains(name) && inputs[name].is_primitive()) {
      value = scalar_text(inputs[name]);
    } else if (params.contains(name) && params[name].is_primitive()) {
      value = scalar_text(params[name]);
    }
    out += value ? *value : it->str();
  }
  out.append(last, tmpl.cend());
  return out;
}

// ---- scheduler ------------------------------------------------------------

namespace {

template <typename T>
class Queue {
 public:
  void push(T v) {
    {
      std::lock_guard lock(mutex_);
      items_.push_back(std::move(v));
    }
    cv_.notify_one();
  }
  /// Blocks until an item arrives or the queue is closed and empty.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return closed_ || !items_.empty(); });
    return take();
  }
  std::optional<T> pop_for(std::chrono::milliseconds wait) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, wait, [&] { return closed_ || !items_.empty(); });
    return take();
  }
  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::optional<T> take() {
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }

  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<T> items_;
  bool closed_ = false;
};

struct Job {
  std::size_t index;
  TaskInstance task;
};

struct Done {
  std::size_t index;
  TaskOutcome outcome;
};

fs::path next_run_dir(const fs::path& workdir) {
  const fs::path runs = workdir / "runs";
  fs::create_directories(runs);
  int highest = 0;
  for (const auto& entry : fs::directory_iterator(runs)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("run-", 0) == 0)
      if (auto n = parse_integer(name.substr(4))) highest = std::max(highest, static_cast<int>(*n));
  }
  for (int n = highest + 1;; ++n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run-%03d", n);
    if (fs::create_directory(runs / buf)) return runs / buf;
  }
}

class Coordinator {
 public:
  Coordinator(const WorkflowSpec& spec, const SweepPlan& plan, const Registry& registry, const RunOptions& options)
      : spec_(spec),
        plan_(plan),
        registry_(registry),
        options_(options),
        workdir_(options.workdir.empty() ? default_workdir() : options.workdir),
        store_(workdir_ / "work") {
    if (options.max_parallel < 1) throw InvariantError("max_parallel must be at least 1");
    const std::size_t n = plan.tasks.size();
    states_.assign(n, TaskState::Pending);
    outputs_.assign(n, json());
    instances_.resize(n);
    keys_.resize(n);
    retry_at_.assign(n, 0);
    waiting_.assign(n, 0);
    dependents_.resize(n);
    for (const auto& t : plan.tasks) {
      waiting_[t.index] = t.deps.size();
      for (auto d : t.deps) dependents_[d].push_back(t.index);
    }
  }

  RunResult run() {
    fs::create_directories(workdir_);
    result_.run_dir = next_run_dir(workdir_);
    result_.trace_file = result_.run_dir / "trace.tsv";
    result_.scheduler_log = result_.run_dir / "scheduler.log";
    init_trace(result_.trace_file);
    log_.open(result_.scheduler_log);
    if (!log_) throw IoError("cannot write " + result_.scheduler_log.string());
    log_ << "# elapsed_ms\tevent\ttask_id\trunning\n";
    t0_ = std::chrono::steady_clock::now();

    for (std::size_t i = 0; i < states_.size(); ++i)
      if (waiting_[i] == 0) make_ready(i);

    std::vector<std::thread> workers;
    workers.reserve(options_.max_parallel);
    for (std::size_t w = 0; w < options_.max_parallel; ++w)
      workers.emplace_back([this] {
        ExecuteOptions eo{options_.measure_resources};
        while (auto job = jobs_.pop()) {
          TaskOutcome outcome;
          try {
            outcome = execute_task(job->task, registry_, store_, eo);
          } catch (const std::exception& e) {
            outcome.status = TaskOutcome::Status::Failed;
            outcome.error = e.what();
            outcome.start_ms = outcome.complete_ms = now_ms();
          }
          done_.push({job->index, std::move(outcome)});
        }
      });

    try {
      loop();
    } catch (...) {
      jobs_.close();
      for (auto& w : workers) w.join();
      throw;
    }
    jobs_.close();
    for (auto& w : workers) w.join();

    log_ << "# peak_running=" << result_.peak_running << " max_parallel=" << options_.max_parallel << "\n";
    log_.close();
    result_.states = states_;
    try {
      render_provenance_report(result_.run_dir);
    } catch (const EmptyInput&) {
    }
    const bool complete = std::all_of(states_.begin(), states_.end(), is_terminal);
    if (!complete)
      throw RunAborted("run aborted in " + result_.run_dir.string() + " after " + std::to_string(result_.succeeded) +
                       " successful tasks; rerun with resume to continue");
    return result_;
  }

 private:
  bool stopping() const {
    if (options_.abort_after_successes > 0 && result_.succeeded >= options_.abort_after_successes) return true;
    return options_.interrupt && options_.interrupt->load();
  }

  std::int64_t elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0_).count();
  }

  void log_event(const char* event, std::size_t i) {
    log_ << elapsed_ms() << '\t' << event << '\t' << plan_.tasks[i].id << '\t' << running_ << '\n';
    log_.flush();
  }

  void make_ready(std::size_t i) {
    states_[i] = TaskState::Ready;
    ready_.insert(i);
  }

  void loop() {
    for (;;) {
      const bool stop = stopping();
      const std::int64_t now = now_ms();
      for (auto it = retrying_.begin(); it != retrying_.end();) {
        if (!stop && retry_at_[*it] <= now) {
          make_ready(*it);
          it = retrying_.erase(it);
        } else {
          ++it;
        }
      }
      while (!stop && running_ < options_.max_parallel && !ready_.empty()) {
        const std::size_t i = *ready_.begin();
        ready_.erase(ready_.begin());
        dispatch(i);
      }
      if (running_ == 0 && (stop || (ready_.empty() && retrying_.empty()))) return;

      std::int64_t wait = 50;
      for (auto i : retrying_) wait = std::min(wait, std::max<std::int64_t>(1, retry_at_[i] - now));
      if (auto d = done_.pop_for(std::chrono::milliseconds(wait))) {
        --running_;
        log_event("end", d->index);
        finish(d->index, std::move(d->outcome));
      }
    }
  }

  void dispatch(std::size_t i) {
    const PlannedTask& pt = plan_.tasks[i];
    if (!instances_[i]) {
      const std::int64_t t_prepare = now_ms();
      try {
        instances_[i] = prepare(pt);
        keys_[i] = cache_key(*instances_[i], contract_version(*instances_[i], registry_)).hex();
      } catch (const std::exception& e) {
        instances_[i].reset();
        TaskOutcome failed;
        failed.error = e.what();
        failed.start_ms = failed.complete_ms = std::max(now_ms(), t_prepare);
        fail_permanently(i, failed, 1, pt.process, "", t_prepare);
        return;
      }
      if (options_.resume) {
        const std::int64_t t = now_ms();
        if (auto cached = store_.lookup(Digest256::from_hex(keys_[i]))) {
          serve_cached(i, std::move(*cached), t);
          return;
        }
      }
      if (auto it = inflight_.find(keys_[i]); it != inflight_.end()) {
        duplicates_[keys_[i]].push_back(i);
        return;
      }
    }
    inflight_[keys_[i]] = i;
    states_[i] = TaskState::Running;
    submit_ms_[i] = now_ms();
    ++running_;
    result_.peak_running = std::max(result_.peak_running, running_);
    log_event("start", i);
    jobs_.push({i, *instances_[i]});
  }

  TaskInstance prepare(const PlannedTask& pt) {
    const ProcessDef* proc = spec_.process(pt.process);
    if (!proc) throw SchemaError("unknown process '" + pt.process + "'");
    const OutputLookup lookup = [this](std::size_t task, const std::string& port) -> const json& {
      const json& out = outputs_.at(task);
      if (!out.is_object() || !out.contains(port))
        throw InvariantError("output '" + port + "' of " + plan_.tasks.at(task).id + " is not available");
      return out[port];
    };
    json inputs = json::object();
    for (const auto& [port, item] : pt.bindings) inputs[port] = materialize(item, lookup);
    const fs::path data_dir = options_.data_dir.empty() ? fs::current_path() : options_.data_dir;

    TaskInstance t;
    t.id = pt.id;
    t.process = pt.process;
    t.payload = task_payload(spec_, *proc, registry_, inputs, data_dir);
    t.tag = render_tag(proc->tag, pt, t.payload);
    t.builtin = proc->builtin;
    t.command = proc->command;
    t.outputs = proc->outputs;
    for (const auto& [port, type] : proc->outputs)
      if (auto n = declared_emits(spec_, *proc, port)) t.emits[port] = *n;
    t.timeout_ms = proc->timeout_ms;
    t.retry = {proc->retries, proc->retry_backoff_ms};
    return t;
  }

  void trace(const TaskInstance& t, const std::string& status, const TaskOutcome& o, std::int64_t submit,
             bool cache_hit) {
    TraceRecord r;
    r.task_id = t.id;
    r.process = t.process;
    r.tag = t.tag;
    r.status = status;
    r.attempt = t.attempt;
    r.submit_ms = submit;
    r.start_ms = std::max(o.start_ms, submit);
    r.complete_ms = std::max(o.complete_ms, r.start_ms);
    r.duration_ms = r.complete_ms - r.start_ms;
    if (!cache_hit) {
      r.cpu_fraction = o.usage.cpu_fraction;
      r.peak_rss_bytes = o.usage.peak_rss_bytes;
    }
    r.cache_hit = cache_hit;
    r.workdir = o.workdir.string();
    append_trace(r, result_.trace_file);
  }

  void serve_cached(std::size_t i, json outputs, std::int64_t lookup_start) {
    TaskOutcome o;
    o.status = TaskOutcome::Status::Cached;
    o.start_ms = lookup_start;
    o.complete_ms = now_ms();
    o.workdir = store_.dir(Digest256::from_hex(keys_[i]));
    trace(*instances_[i], "Cached", o, lookup_start, true);
    states_[i] = TaskState::Cached;
    ++result_.cached;
    outputs_[i] = std::move(outputs);
    log_event("cached", i);
    publish(i);
    release_dependents(i);
  }

  void finish(std::size_t i, TaskOutcome outcome) {
    TaskInstance& t = *instances_[i];
    const std::int64_t submit = submit_ms_[i];
    if (t.attempt == 1) ++result_.executed;
    if (outcome.status == TaskOutcome::Status::Succeeded) {
      trace(t, "Succeeded", outcome, submit, false);
      states_[i] = TaskState::Succeeded;
      ++result_.succeeded;
      outputs_[i] = std::move(outcome.outputs);
      inflight_.erase(keys_[i]);
      publish(i);
      release_dependents(i);
      if (auto it = duplicates_.find(keys_[i]); it != duplicates_.end()) {
        const auto dups = std::move(it->second);
        duplicates_.erase(it);
        for (auto d : dups) serve_cached(d, outputs_[i], now_ms());
      }
      return;
    }
    const auto decision =
        apply_retry_policy(outcome, t.retry, t.attempt, derive_seed(derive_seed(options_.seed, t.id), t.attempt));
    if (decision.retry) {
      trace(t, "Failed", outcome, submit, false);
      states_[i] = TaskState::Retrying;
      retry_at_[i] = now_ms() + decision.delay_ms;
      retrying_.insert(i);
      ++t.attempt;
      log_event("retry", i);
      return;
    }
    inflight_.erase(keys_[i]);
    fail_permanently(i, outcome, t.attempt, t.process, t.tag, submit);
  }

  void fail_permanently(std::size_t i, const TaskOutcome& outcome, int attempt, const std::string& process,
                        const std::string& tag, std::int64_t submit) {
    TaskInstance t;
    if (instances_[i]) {
      t = *instances_[i];
    } else {
      t.id = plan_.tasks[i].id;
      t.process = process;
      t.tag = tag;
    }
    t.attempt = attempt;
    trace(t, "FailedPermanent", outcome, submit, false);
    states_[i] = TaskState::FailedPermanent;
    ++result_.failed;
    result_.errors.push_back(t.id + ": " + outcome.error);
    std::vector<std::size_t> stack = dependents_[i];
    if (!keys_[i].empty())
      if (auto it = duplicates_.find(keys_[i]); it != duplicates_.end()) {
        for (auto d : it->second) {
          states_[d] = TaskState::Skipped;
          ++result_.skipped;
          stack.insert(stack.end(), dependents_[d].begin(), dependents_[d].end());
        }
        duplicates_.erase(it);
      }
    while (!stack.empty()) {
      const std::size_t d = stack.back();
      stack.pop_back();
      if (is_terminal(states_[d]) || states_[d] == TaskState::Running) continue;
      if (states_[d] == TaskState::Ready) ready_.erase(d);
      states_[d] = TaskState::Skipped;
      ++result_.skipped;
      stack.insert(stack.end(), dependents_[d].begin(), dependents_[d].end());
    }
  }

  void release_dependents(std::size_t i) {
    for (auto d : dependents_[i])
      if (--waiting_[d] == 0 && states_[d] == TaskState::Pending) make_ready(d);
  }

  void publish(std::size_t i) {
    const ProcessDef* proc = spec_.process(plan_.tasks[i].process);
    if (!proc || proc->publish.empty()) return;
    const fs::path results = workdir_ / "results";
    fs::create_directories(results);
    auto copy = [&](const json& ref) {
      if (!is_file_ref(ref)) return;
      const fs::path src = ref["path"].get<std::string>();
      const fs::path dst = results / src.filename();
      fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
      result_.published.push_back(dst);
    };
    for (const auto& port : proc->publish) {
      if (!outputs_[i].contains(port)) continue;
      const json& v = outputs_[i][port];
      if (v.is_array()) {
        for (const auto& x : v) copy(x);
      } else {
        copy(v);
      }
    }
  }

  const WorkflowSpec& spec_;
  const SweepPlan& plan_;
  const Registry& registry_;
  const RunOptions& options_;
  fs::path workdir_;
  CacheStore store_;
  RunResult result_;
  std::ofstream log_;
  std::chrono::steady_clock::time_point t0_;

  std::vector<TaskState> states_;
  std::vector<json> outputs_;
  std::vector<std::optional<TaskInstance>> instances_;
  std::vector<std::string> keys_;
  std::vector<std::int64_t> retry_at_;
  std::map<std::size_t, std::int64_t> submit_ms_;
  std::vector<std::size_t> waiting_;
  std::vector<std::vector<std::size_t>> dependents_;
  std::set<std::size_t> ready_;
  std::set<std::size_t> retrying_;
  std::map<std::string, std::size_t> inflight_;
  std::map<std::string, std::vector<std::size_t>> duplicates_;
  std::size_t running_ = 0;

  Queue<Job> jobs_;
  Queue<Done> done_;
};

}  // namespace

RunResult run_workflow(const WorkflowSpec& spec, const SweepPlan& plan, const Registry& registry,
                       const RunOptions& options) {
  Coordinator c(spec, plan, registry, options);
  return c.run();
}

}  // namespace cameo
