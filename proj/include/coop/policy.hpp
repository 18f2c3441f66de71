#pragma once

// Agent policies: propose / commit / draft / refine.
//
// draft never sees the world model; the plan library only reaches refine.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coop/actions.hpp"
#include "coop/negotiation.hpp"
#include "coop/world_model.hpp"

namespace coop {

struct Proposal {
  BlockId task{};
  std::string rationale;
};

class AgentPolicy {
 public:
  virtual ~AgentPolicy() = default;

  /// Policies that do not negotiate skip the room: the runner assigns their
  /// proposal directly, without quorum.
  virtual bool negotiates() const { return true; }

  /// nullopt means NO_TASK.
  virtual std::optional<Proposal> propose(AgentId self, const SymbolicObservation& obs,
                                          const NegotiationBuffer& buffer) = 0;
  virtual std::optional<BlockId> commit(AgentId self, const SymbolicObservation& obs, const NegotiationBuffer& buffer,
                                        const std::vector<TeamSizeStats>& team_stats) = 0;
  virtual std::optional<PlanInstance> draft(AgentId self, const SymbolicObservation& obs, BlockId task) = 0;
  virtual PlanInstance refine(AgentId self, const PlanInstance& draft, const RetrievalResult& library,
                              const SymbolicObservation& obs) = 0;

  /// Fallback notices accumulated since the last call (LLM transport failures).
  virtual std::vector<std::string> drain_notices() { return {}; }
};

/// Target of the baseline: active block nearest the goal, lowest id on ties.
std::optional<BlockId> baseline_target(const SymbolicObservation& obs);

/// [MoveToBlock(b, W), Push(b, max(1, distance))].
PlanInstance baseline_plan(AgentId self, const SymbolicObservation& obs, BlockId task);

std::unique_ptr<AgentPolicy> baseline_policy();

struct ScriptStep {
  std::optional<BlockId> propose;  // nullopt: NO_TASK
  std::string rationale;
  std::optional<BlockId> commit;   // defaults to the proposal
  std::vector<std::string> plan;   // canonical action lines
};

/// Replays `steps` in order, one step per room. An exhausted script is NO_TASK.
std::unique_ptr<AgentPolicy> scripted_policy(std::vector<ScriptStep> steps, int default_timeout = kDefaultTimeout);

struct LlmEndpointConfig {
  std::string base_url = "http://127.0.0.1:8080";
  std::string path = "/v1/complete";
  std::string model = "local";
  double timeout_seconds = 30.0;
  int max_tokens = 512;
  double temperature = 0.0;
  int retries = 1;
};

void validate_llm_config(const LlmEndpointConfig& config);

struct PromptTemplates {
  std::string propose;
  std::string commit;
  std::string draft;
  std::string refine;
};

/// Reads propose.txt, commit.txt, draft.txt and refine.txt from `dir`.
PromptTemplates load_templates(const std::filesystem::path& dir);

/// Replaces `{{NAME}}` placeholders.
std::string fill_template(std::string text, const std::map<std::string, std::string>& values);

/// One completion call: POST {model, prompt, max_tokens, temperature} -> {text}.
/// nullopt after all retries fail.
std::optional<std::string> llm_complete(const LlmEndpointConfig& config, const std::string& prompt,
                                        std::string* error = nullptr);

std::unique_ptr<AgentPolicy> llm_policy(LlmEndpointConfig config, PromptTemplates templates,
                                        int default_timeout = kDefaultTimeout);

/// Text rendering of a symbolic observation used in prompts.
std::string render_observation(const SymbolicObservation& obs, AgentId self);

std::string render_buffer(const NegotiationBuffer& buffer);

}  // namespace coop
