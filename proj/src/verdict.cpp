#include "coniso/verdict.hpp"

namespace coniso {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::holds: return "holds";
    case Status::fails: return "fails";
    case Status::undecided: return "undecided";
  }
  return "?";
}

json Verdict::to_json() const {
  json out;
  out["schema"] = 1;
  out["relation"] = relation;
  if (undecided()) {
    out["holds"] = nullptr;
  } else {
    out["holds"] = holds();
  }
  out["status"] = to_string(status);
  out["certificate"] = certificate;
  out["dims"] = dims;
  return out;
}

Verdict make_verdict(std::string relation, bool holds, std::string kind) {
  Verdict v;
  v.relation = std::move(relation);
  v.status = holds ? Status::holds : Status::fails;
  v.certificate["kind"] = std::move(kind);
  return v;
}

int exit_code(const Verdict& v) { return v.undecided() ? 2 : 0; }

}  // namespace coniso
