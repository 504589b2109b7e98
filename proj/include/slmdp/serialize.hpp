#pragma once

#include "json.hpp"
#include "slmdp/emulator.hpp"
#include "slmdp/explore.hpp"
#include "slmdp/mdp.hpp"

namespace slmdp {

// Dense-array JSON layout. Per-step arrays are written without the index-0
// padding: phi[g] holds step g+1, mu[g] holds step g+2, theta[g] holds step
// g+1. Doubles round-trip bit-exactly.
nlohmann::json model_to_json(const LinearMdpModel& model);
LinearMdpModel model_from_json(const nlohmann::json& j);

nlohmann::json policy_to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::json& j);

// Witness indices are written as the model's state ids.
nlohmann::json emulator_to_json(const Emulator& em, const LinearMdpModel& model);
Emulator emulator_from_json(const nlohmann::json& j, const LinearMdpModel& model);

// Non-finite reals are written as strings ("inf", "-inf", "nan") so literal
// schedule entries survive the trip into JSON.
nlohmann::json json_real(double v);
nlohmann::json budget_overrides_to_json(const BudgetOverrides& ov);
nlohmann::json schedule_params_to_json(const ScheduleParams& params);

// One record per run: which environment, which schedule, which seeds, how
// many episodes each phase consumed, and where the outputs went.
nlohmann::json run_manifest_json(const std::string& env_ref,
                                 const ScheduleParams& params,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::vector<std::uint64_t>& phase_episodes,
                                 const std::vector<std::string>& outputs);

}  // namespace slmdp
