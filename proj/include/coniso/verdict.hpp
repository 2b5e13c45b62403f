#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace coniso {

using json = nlohmann::ordered_json;

enum class Status { holds, fails, undecided };

std::string_view to_string(Status s);

/// Outcome of a decision procedure together with the evidence that backs it.
/// The certificate always carries a "kind" field naming the witness type.
struct Verdict {
  std::string relation;
  Status status = Status::undecided;
  json certificate = json::object();
  json dims = json::object();

  bool holds() const { return status == Status::holds; }
  bool fails() const { return status == Status::fails; }
  bool undecided() const { return status == Status::undecided; }

  json to_json() const;
};

Verdict make_verdict(std::string relation, bool holds, std::string kind);

/// Process exit code for a verdict: 0 when decided, 2 when undecided.
int exit_code(const Verdict& v);

}  // namespace coniso
