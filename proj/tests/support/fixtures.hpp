#pragma once

#include <filesystem>
#include <string>

#include "coop/env.hpp"
#include "coop/trace.hpp"
#include "coop/world_model.hpp"

namespace fixture {

std::filesystem::path test_dir();
std::filesystem::path source_dir();

std::string read_file(const std::filesystem::path& p);

/// Hand-written two-episode fixture (tests/fixtures/episode_{a,b}.trace.jsonl).
coop::EpisodeTrace episode_a();
coop::EpisodeTrace episode_b();
coop::WorldModelGraph world_ab();

/// 10x10 grid, blocks 1..3, two agents, advanced to tick 5 with NOOPs.
coop::GridState three_block_state();

/// Fresh scratch directory under the system temp dir.
std::filesystem::path scratch(const std::string& name);

}  // namespace fixture
