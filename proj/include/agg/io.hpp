#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>

#include "agg/continuation.hpp"
#include "agg/game.hpp"
#include "agg/generators.hpp"
#include "agg/oracle.hpp"
#include "agg/symmetric.hpp"
#include "agg/types.hpp"

namespace agg::io {

using Json = nlohmann::ordered_json;

// Unreadable files, malformed JSON and documents of the wrong shape.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& document);

// Game files. Structural defects that validation can describe (bad indices,
// missing table entries) are left for validate_game; only documents that
// cannot be mapped onto a game at all raise FormatError.
ActionGraphGame game_from_json(const Json& document);
Json game_to_json(const ActionGraphGame& game);
ActionGraphGame load_game(const std::string& path);

// Strategy files: {"version": 1, "strategies": [[...], ...]}.
MixedProfile strategy_from_json(const Json& document);
Json strategy_to_json(const MixedProfile& profile);
MixedProfile load_strategy(const std::string& path);

// {"version": 1, "shape": [...], "payoffs": [[...], ...]}.
NormalFormGame normal_form_from_json(const Json& document);
Json normal_form_to_json(const NormalFormGame& nfg);

// {"version": 1, "num_actions": [...], "parents": [[...]], "tables": [[...]]}.
GraphicalGame graphical_from_json(const Json& document);

Json validation_to_json(const ValidationReport& report);
Json jacobian_to_json(const PayoffJacobian& jacobian);
Json jacobian_to_json(const SymmetricJacobian& jacobian);
Json regret_to_json(const RegretReport& report, double eps);
Json diagnostics_to_json(const PathDiagnostics& diagnostics);

}  // namespace agg::io
