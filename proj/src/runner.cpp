#include "coop/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

#include "coop/controller.hpp"
#include "coop/negotiation.hpp"

namespace coop {

namespace {

using Clock = std::chrono::steady_clock;

Json plan_texts(const PlanInstance& p) {
  Json arr = Json::array();
  for (const auto& a : p.actions) arr.push_back(format_action(a));
  return arr;
}

Json agent_list(const std::vector<AgentId>& v) {
  Json arr = Json::array();
  for (AgentId a : v) arr.push_back(to_int(a));
  return arr;
}

Json assignment_map(const std::map<AgentId, BlockId>& m) {
  Json j = Json::object();
  for (const auto& [a, b] : m) j[std::to_string(to_int(a))] = block_name(b);
  return j;
}

std::string rejection_text(const std::vector<Rejection>& rs) {
  std::string s;
  for (const auto& r : rs) {
    if (!s.empty()) s += "; ";
    s += "action " + std::to_string(r.position) + ": " + std::string(to_string(r.code));
    if (!r.detail.empty()) s += " (" + r.detail + ")";
  }
  return s;
}

class EpisodeLoop {
 public:
  EpisodeLoop(const ExperimentConfig& config, const WorldModelGraph& world,
              std::vector<std::unique_ptr<AgentPolicy>>& policies, const std::optional<std::filesystem::path>& path)
      : config_(config), world_(world), policies_(policies), started_(Clock::now()) {
    if (path) recorder_.emplace(*path, timing_path_for(*path));
    else recorder_.emplace();
    for (std::size_t i = 0; i < policies_.size(); ++i) policy_map_[AgentId{static_cast<int>(i)}] = policies_[i].get();
  }

  EpisodeResult run() {
    state_ = init_env(config_.env);
    while (!is_terminal(state_).terminal) {
      std::vector<AgentId> idle;
      for (const auto& a : state_.agents)
        if (!executors_.contains(a.id) && !retired_.contains(a.id)) idle.push_back(a.id);
      if (!idle.empty()) replan(idle);
      tick();
    }
    finish();
    EpisodeResult r;
    r.trace = recorder_->take();
    r.metrics = compute_metrics(r.trace);
    r.final_state = state_;
    return r;
  }

 private:
  double now() const { return std::chrono::duration<double>(Clock::now() - started_).count(); }

  void emit(int tick, AgentId agent, EventKind kind, Json payload, std::optional<double> wall = std::nullopt) {
    recorder_->record(TraceEvent{tick, wall ? *wall : now(), agent, kind, std::move(payload)});
  }

  void drain(AgentId a) {
    for (auto& n : policy_map_.at(a)->drain_notices())
      emit(state_.tick, a, EventKind::LlmFallback, Json{{"detail", n}});
  }

  std::map<BlockId, int> executing_counts() const {
    std::map<BlockId, int> m;
    for (const auto& [a, e] : executors_) ++m[e.plan.committed_task];
    return m;
  }

  void set_phase(AgentId a, AgentPhase p) { state_.agent(a)->phase = p; }

  void replan(const std::vector<AgentId>& idle) {
    std::vector<AgentId> talkers, direct;
    for (AgentId a : idle) (policy_map_.at(a)->negotiates() ? talkers : direct).push_back(a);

    std::map<AgentId, BlockId> assigned;
    const SymbolicObservation obs = observe_symbolic(state_);

    if (!talkers.empty()) {
      for (const auto& [a, e] : executors_) set_phase(a, AgentPhase::Suspended);
      for (AgentId a : talkers) set_phase(a, AgentPhase::Negotiating);
      const int room = ++rooms_;
      const double opened = now();
      emit(state_.tick, kRoom, EventKind::CommOpen, Json{{"room", room}, {"participants", agent_list(talkers)}}, opened);
      RoomOutcome out = run_room(talkers, state_, world_, policy_map_, executing_counts(), tracker_);
      for (const auto& e : out.buffer.entries()) {
        Json payload{{"room", room}, {"task", block_name(e.task)}};
        if (e.kind == EntryKind::Proposal) payload["rationale"] = e.rationale;
        emit(state_.tick, e.agent, e.kind == EntryKind::Proposal ? EventKind::Proposal : EventKind::Commit,
             std::move(payload), opened + e.wall_clock);
      }
      for (const auto& v : out.violations)
        emit(state_.tick, v.agent, EventKind::ProtocolViolation,
             Json{{"stage", v.stage == EntryKind::Proposal ? "propose" : "commit"},
                  {"detail", v.detail},
                  {"substituted", block_name(v.substituted)}});
      for (AgentId a : talkers) drain(a);
      Json entries = Json::array();
      for (const auto& e : out.buffer.entries())
        entries.push_back(Json{{"agent", to_int(e.agent)},
                               {"kind", e.kind == EntryKind::Proposal ? "PROPOSAL" : "COMMIT"},
                               {"task", block_name(e.task)},
                               {"rationale", e.rationale}});
      emit(state_.tick, kRoom, EventKind::RoomClose,
           Json{{"room", room},
                {"entries", entries},
                {"assignments", assignment_map(out.mapping.assignments)},
                {"forced", assignment_map(out.mapping.forced)},
                {"unassigned", agent_list(out.mapping.unassigned)},
                {"withdrawn", agent_list(out.mapping.withdrawn)}});
      for (AgentId a : out.mapping.withdrawn) retired_.insert(a);
      for (AgentId a : talkers)
        if (auto t = out.mapping.task_of(a)) assigned[a] = *t;
    }

    // Non-negotiating policies pick their own task with no quorum.
    for (AgentId a : direct) {
      NegotiationBuffer solo = open_room({}, state_.tick, world_, state_);
      auto p = policy_map_.at(a)->propose(a, obs, solo);
      drain(a);
      if (!p) {
        retired_.insert(a);
        continue;
      }
      if (!obs.find_block(p->task)) {
        auto fb = fallback_task(obs);
        if (!fb) {
          retired_.insert(a);
          continue;
        }
        emit(state_.tick, a, EventKind::ProtocolViolation,
             Json{{"stage", "propose"}, {"detail", "proposed inactive task " + block_name(p->task)},
                  {"substituted", block_name(*fb)}});
        p->task = *fb;
      }
      assigned[a] = p->task;
    }

    for (const auto& [a, task] : assigned) install_plan(a, task);

    for (const auto& body : state_.agents) set_phase(body.id, executors_.contains(body.id) ? AgentPhase::Executing : AgentPhase::Idle);
  }

  void install_plan(AgentId a, BlockId task) {
    AgentPolicy* policy = policy_map_.at(a);
    const SymbolicObservation obs = observe_symbolic(state_);
    auto draft = policy->draft(a, obs, task);
    if (!draft) {
      drain(a);
      retired_.insert(a);
      return;
    }
    auto stamp = [&](PlanInstance p) {
      p.committed_task = task;
      p.author = a;
      p.created_at = state_.tick;
      return p;
    };
    PlanInstance plan = stamp(policy->refine(a, *draft, retrieve_plans(world_, task, config_.k, config_.l), obs));
    drain(a);
    auto rejected = validate_plan(plan, state_);
    if (!rejected.empty()) {
      emit(state_.tick, a, EventKind::ProtocolViolation,
           Json{{"stage", "refine"}, {"detail", rejection_text(rejected)}});
      plan = stamp(*draft);
      rejected = validate_plan(plan, state_);
      if (!rejected.empty()) {
        emit(state_.tick, a, EventKind::ProtocolViolation,
             Json{{"stage", "draft"}, {"detail", rejection_text(rejected)}});
        plan = baseline_plan(a, obs, task);
        plan.created_at = state_.tick;
      }
    }
    emit(state_.tick, a, EventKind::PlanStart, Json{{"task", block_name(task)}, {"plan", plan_texts(plan)}});
    executors_[a] = start_plan(std::move(plan));
  }

  void emit_controller(AgentId a, const std::vector<ControllerEvent>& events) {
    for (const auto& ev : events) {
      Json payload{{"index", ev.index}, {"action", format_action(ev.action)}};
      if (ev.kind == ControllerEvent::Kind::ActionStart) {
        emit(ev.tick, a, EventKind::ActionStart, std::move(payload));
      } else {
        payload["outcome"] = ev.success ? "success" : "fail";
        if (!ev.success) payload["reason"] = to_string(ev.reason);
        emit(ev.tick, a, EventKind::ActionEnd, std::move(payload));
      }
    }
  }

  void end_plan(AgentId a, bool truncated) {
    const ExecutorState& e = executors_.at(a);
    const Block* b = state_.block(e.plan.committed_task);
    const bool delivered = b && !b->active();
    emit(state_.tick, a, EventKind::PlanEnd,
         Json{{"task", block_name(e.plan.committed_task)}, {"outcome", delivered ? 1 : 0}, {"truncated", truncated}});
    executors_.erase(a);
  }

  void tick() {
    JointAction joint;
    std::vector<AgentId> finished;
    for (auto& [a, e] : executors_) {
      state_.agent(a)->phase = e.mode == ExecMode::Waiting ? AgentPhase::Waiting : AgentPhase::Executing;
    }
    const GridState phased = state_;
    for (auto& [a, e] : executors_) {
      TickResult tr = prepare_tick(e, a, phased);
      emit_controller(a, tr.events);
      e = std::move(tr.exec);
      joint[a] = tr.primitive;
      if (e.done()) finished.push_back(a);
    }
    for (AgentId a : finished) {
      end_plan(a, false);
      set_phase(a, AgentPhase::Idle);
    }

    StepResult step = env_step(state_, joint);
    state_ = std::move(step.state);
    for (const auto& be : step.report.blocks)
      if (be.done) emit(state_.tick, kRoom, EventKind::BlockDone, Json{{"block", block_name(be.block)}, {"tick", state_.tick}});

    finished.clear();
    for (auto& [a, e] : executors_) {
      AdvanceResult ar = advance(e, a, step.report, state_);
      emit_controller(a, ar.events);
      e = std::move(ar.exec);
      if (e.done()) finished.push_back(a);
    }
    for (AgentId a : finished) {
      end_plan(a, false);
      set_phase(a, AgentPhase::Idle);
    }
  }

  void finish() {
    std::vector<AgentId> open;
    for (const auto& [a, e] : executors_) open.push_back(a);
    for (AgentId a : open) {
      const ExecutorState& e = executors_.at(a);
      if (e.action_started && e.current())
        emit(state_.tick, a, EventKind::ActionEnd,
             Json{{"index", e.index}, {"action", format_action(*e.current())}, {"outcome", "fail"}, {"reason", "TRUNCATED"}});
      end_plan(a, true);
    }
    const Terminal t = is_terminal(state_);
    Json blocks = Json::array(), done = Json::array();
    for (const auto& b : state_.blocks) {
      blocks.push_back(block_name(b.id));
      if (!b.active()) done.push_back(block_name(b.id));
    }
    emit(state_.tick, kRoom, EventKind::EpisodeEnd,
         Json{{"reason", to_string(t.reason)},
              {"episode", static_cast<int>(world_.episodes().size()) + 1},
              {"agents", static_cast<int>(state_.agents.size())},
              {"blocks", blocks},
              {"done", done}});
  }

  const ExperimentConfig& config_;
  const WorldModelGraph& world_;
  std::vector<std::unique_ptr<AgentPolicy>>& policies_;
  PolicyMap policy_map_;
  Clock::time_point started_;
  std::optional<TraceRecorder> recorder_;
  GridState state_;
  std::map<AgentId, ExecutorState> executors_;
  std::set<AgentId> retired_;
  QuorumTracker tracker_;
  int rooms_ = 0;
};

void write_text(const std::filesystem::path& path, const std::string& text, std::vector<std::filesystem::path>& files) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
  files.push_back(path);
}

void write_manifest(const std::filesystem::path& out_dir, const ExperimentSummary& s, bool complete,
                    const std::string& error) {
  Json files = Json::array();
  for (const auto& f : s.files) files.push_back(std::filesystem::relative(f, out_dir).generic_string());
  Json j{{"complete", complete}, {"episodes", s.metrics.size()}, {"files", files}, {"node_counts", s.node_counts}};
  if (!error.empty()) j["error"] = error;
  std::ofstream out(out_dir / "manifest.json");
  out << j.dump(2) << "\n";
}

}  // namespace

std::string episode_stem(int episode) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "episode_%03d", episode);
  return buf;
}

std::vector<std::unique_ptr<AgentPolicy>> make_policies(const ExperimentConfig& config) {
  std::vector<std::unique_ptr<AgentPolicy>> out;
  std::optional<PromptTemplates> templates;
  for (std::size_t i = 0; i < config.policies.size(); ++i) {
    switch (config.policies[i]) {
      case PolicyKind::Baseline:
        out.push_back(baseline_policy());
        break;
      case PolicyKind::Scripted: {
        auto it = config.scripts.find(static_cast<int>(i));
        out.push_back(scripted_policy(it == config.scripts.end() ? std::vector<ScriptStep>{} : it->second,
                                      config.default_timeout));
        break;
      }
      case PolicyKind::Llm:
        if (!templates) templates = load_templates(config.templates_dir);
        out.push_back(llm_policy(config.llm, *templates, config.default_timeout));
        break;
    }
  }
  return out;
}

EpisodeResult run_episode(const ExperimentConfig& config, const WorldModelGraph& world,
                          std::vector<std::unique_ptr<AgentPolicy>>& policies,
                          const std::optional<std::filesystem::path>& trace_path) {
  validate_experiment(config);
  if (policies.size() != config.env.agent_starts.size())
    throw Error(ErrorCode::ConfigInvalid, "one policy per agent is required");
  return EpisodeLoop(config, world, policies, trace_path).run();
}

EpisodeResult run_episode(const ExperimentConfig& config, const WorldModelGraph& world,
                          const std::optional<std::filesystem::path>& trace_path) {
  auto policies = make_policies(config);
  return run_episode(config, world, policies, trace_path);
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  validate_experiment(config);
  namespace fs = std::filesystem;
  const fs::path out = config.out_dir;
  ExperimentSummary s;
  s.world_path = config.world_path.empty() ? out / "world.json" : config.world_path;
  try {
    for (const char* sub : {"traces", "metrics", "timelines", "graphs", "tables"}) fs::create_directories(out / sub);
    WorldModelGraph world = load_world(s.world_path);
    for (int ep = 1; ep <= config.episodes; ++ep) {
      const std::string stem = episode_stem(ep);
      const fs::path trace_path = out / "traces" / (stem + ".trace.jsonl");
      EpisodeResult r = run_episode(config, world, trace_path);
      s.files.push_back(trace_path);
      s.files.push_back(timing_path_for(trace_path));
      ingest_episode(world, r.trace);
      save_world(world, s.world_path);
      s.node_counts.push_back(world.node_count());
      write_text(out / "metrics" / (stem + ".json"), metrics_to_json(r.metrics).dump(2) + "\n", s.files);
      write_text(out / "timelines" / (stem + ".svg"), render_timeline(r.trace), s.files);
      if (std::find(config.snapshot_episodes.begin(), config.snapshot_episodes.end(), ep) !=
          config.snapshot_episodes.end()) {
        char name[32];
        std::snprintf(name, sizeof name, "world_ep%03d", ep);
        write_text(out / "graphs" / (std::string(name) + ".json"), export_graph(world, GraphFormat::Json), s.files);
        write_text(out / "graphs" / (std::string(name) + ".dot"), export_graph(world, GraphFormat::Dot), s.files);
      }
      s.metrics.push_back(std::move(r.metrics));
    }
    ExperimentTables t = aggregate_runs(s.metrics);
    write_text(out / "tables" / "completion.tsv", t.completion, s.files);
    write_text(out / "tables" / "series.tsv", t.series, s.files);
    write_text(out / "tables" / "commitments.tsv", t.commitments, s.files);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) write_manifest(out, s, false, e.what());
    throw;
  } catch (const fs::filesystem_error& e) {
    write_manifest(out, s, false, e.what());
    throw Error(ErrorCode::IoError, e.what());
  }
  write_manifest(out, s, true, "");
  return s;
}

}  // namespace coop
