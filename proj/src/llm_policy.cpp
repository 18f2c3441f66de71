#include <fstream>
#include <regex>
#include <sstream>

#include <httplib.h>

#include "coop/policy.hpp"

namespace coop {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::IoError, "cannot open template " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<BlockId> first_block_token(const std::string& text) {
  static const std::regex re(R"(block_(\d+))");
  std::smatch m;
  if (!std::regex_search(text, m, re)) return std::nullopt;
  return BlockId{std::stoi(m[1].str())};
}

std::string one_line(std::string s, std::size_t limit = 240) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  auto b = s.find_first_not_of(' ');
  if (b == std::string::npos) return {};
  s = s.substr(b);
  while (!s.empty() && s.back() == ' ') s.pop_back();
  if (s.size() > limit) s.resize(limit);
  return s;
}

class LlmPolicy final : public AgentPolicy {
 public:
  LlmPolicy(LlmEndpointConfig config, PromptTemplates templates, int default_timeout)
      : config_(std::move(config)), templates_(std::move(templates)), default_timeout_(default_timeout) {}

  std::optional<Proposal> propose(AgentId self, const SymbolicObservation& obs,
                                  const NegotiationBuffer& buffer) override {
    auto reply = ask("propose", fill_template(templates_.propose, {{"OBSERVATION", render_observation(obs, self)},
                                                                   {"BUFFER", render_buffer(buffer)},
                                                                   {"GUIDEBOOK", render_guidebook(buffer, {})}}));
    if (reply)
      if (auto b = first_block_token(*reply)) return Proposal{*b, one_line(*reply)};
    auto t = baseline_target(obs);
    if (!t) return std::nullopt;
    return Proposal{*t, "closest to goal"};
  }

  std::optional<BlockId> commit(AgentId self, const SymbolicObservation& obs, const NegotiationBuffer& buffer,
                                const std::vector<TeamSizeStats>& team_stats) override {
    auto reply = ask("commit", fill_template(templates_.commit, {{"OBSERVATION", render_observation(obs, self)},
                                                                 {"BUFFER", render_buffer(buffer)},
                                                                 {"GUIDEBOOK", render_guidebook(buffer, team_stats)}}));
    if (reply)
      if (auto b = first_block_token(*reply)) return b;
    return baseline_target(obs);
  }

  std::optional<PlanInstance> draft(AgentId self, const SymbolicObservation& obs, BlockId task) override {
    if (!obs.find_block(task)) return std::nullopt;
    auto reply = ask("draft", fill_template(templates_.draft, {{"OBSERVATION", render_observation(obs, self)},
                                                               {"COMMITMENT", block_name(task)}}));
    PlanInstance p;
    p.committed_task = task;
    p.author = self;
    p.created_at = obs.tick;
    if (reply) p.actions = parse_plan_text(*reply, default_timeout_);
    if (p.actions.empty()) return baseline_plan(self, obs, task);
    return p;
  }

  PlanInstance refine(AgentId self, const PlanInstance& draft, const RetrievalResult& library,
                      const SymbolicObservation& obs) override {
    auto reply = ask("refine", fill_template(templates_.refine, {{"OBSERVATION", render_observation(obs, self)},
                                                                 {"COMMITMENT", block_name(draft.committed_task)},
                                                                 {"DRAFT", format_plan_lines(draft.actions)},
                                                                 {"PLAN_LIBRARY", render_plan_library(library)}}));
    if (!reply) return draft;
    PlanInstance p = draft;
    p.actions = parse_plan_text(*reply, default_timeout_);
    if (p.actions.empty()) return draft;
    return p;
  }

  std::vector<std::string> drain_notices() override { return std::exchange(notices_, {}); }

 private:
  std::optional<std::string> ask(const char* stage, const std::string& prompt) {
    std::string err;
    auto r = llm_complete(config_, prompt, &err);
    if (!r) notices_.push_back(std::string(stage) + ": " + err);
    return r;
  }

  LlmEndpointConfig config_;
  PromptTemplates templates_;
  int default_timeout_;
  std::vector<std::string> notices_;
};

}  // namespace

void validate_llm_config(const LlmEndpointConfig& c) {
  if (c.timeout_seconds <= 0) throw Error(ErrorCode::ConfigInvalid, "llm timeout must be positive");
  if (c.retries < 0) throw Error(ErrorCode::ConfigInvalid, "llm retries must be >= 0");
  if (c.max_tokens <= 0) throw Error(ErrorCode::ConfigInvalid, "llm max_tokens must be positive");
  if (c.base_url.empty()) throw Error(ErrorCode::ConfigInvalid, "llm base_url is empty");
}

PromptTemplates load_templates(const std::filesystem::path& dir) {
  return PromptTemplates{read_file(dir / "propose.txt"), read_file(dir / "commit.txt"), read_file(dir / "draft.txt"),
                         read_file(dir / "refine.txt")};
}

std::string fill_template(std::string text, const std::map<std::string, std::string>& values) {
  for (const auto& [name, value] : values) {
    const std::string key = "{{" + name + "}}";
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
      text.replace(pos, key.size(), value);
  }
  return text;
}

std::optional<std::string> llm_complete(const LlmEndpointConfig& config, const std::string& prompt,
                                        std::string* error) {
  Json body{{"model", config.model},
            {"prompt", prompt},
            {"max_tokens", config.max_tokens},
            {"temperature", config.temperature}};
  const auto secs = static_cast<time_t>(config.timeout_seconds);
  const auto usecs = static_cast<time_t>((config.timeout_seconds - static_cast<double>(secs)) * 1e6);
  std::string last;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    httplib::Client cli(config.base_url);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    auto res = cli.Post(config.path, body.dump(), "application/json");
    if (!res) {
      last = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last = "HTTP " + std::to_string(res->status);
      continue;
    }
    Json j = Json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("text") || !j["text"].is_string()) {
      last = "malformed response body";
      continue;
    }
    return j["text"].get<std::string>();
  }
  if (error) *error = last;
  return std::nullopt;
}

std::unique_ptr<AgentPolicy> llm_policy(LlmEndpointConfig config, PromptTemplates templates, int default_timeout) {
  validate_llm_config(config);
  return std::make_unique<LlmPolicy>(std::move(config), std::move(templates), default_timeout);
}

}  // namespace coop
