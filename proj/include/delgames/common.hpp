#ifndef DELGAMES_COMMON_HPP
#define DELGAMES_COMMON_HPP

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace delgames {

/// Raised when an input (formula text, game file) is malformed.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(line > 0 ? std::to_string(line) + ":" + std::to_string(column) + ": " + what : what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Raised when an operation is called outside the class of inputs it supports
/// (non-public events for the quotient, multi-world init for announcements, ...).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A proven bound was exceeded; indicates a bug rather than bad input.
class InternalInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Valuations are bitmasks over the atom universe of a presentation.
using AtomSet = std::uint64_t;
inline constexpr int kMaxAtoms = 64;

inline bool has_atom(AtomSet s, int atom) { return (s >> atom) & 1U; }
inline AtomSet with_atom(AtomSet s, int atom) { return s | (AtomSet{1} << atom); }
inline int atom_count(AtomSet s) { return std::popcount(s); }

enum class Team { Exists, Forall };

/// Kleene three-valued truth.
enum class Tri { False, Unknown, True };

inline Tri tri(bool b) { return b ? Tri::True : Tri::False; }
inline Tri tri_not(Tri a) {
  return a == Tri::True ? Tri::False : a == Tri::False ? Tri::True : Tri::Unknown;
}
inline Tri tri_or(Tri a, Tri b) {
  if (a == Tri::True || b == Tri::True) return Tri::True;
  if (a == Tri::False && b == Tri::False) return Tri::False;
  return Tri::Unknown;
}
inline Tri tri_and(Tri a, Tri b) { return tri_not(tri_or(tri_not(a), tri_not(b))); }
inline const char* to_string(Tri t) {
  return t == Tri::True ? "true" : t == Tri::False ? "false" : "unknown";
}

/// Names of agents (with their team) and atoms. Indices are stable ids used
/// throughout the library.
struct Vocabulary {
  std::vector<std::string> agents;
  std::vector<Team> teams;
  std::vector<std::string> atoms;

  int num_agents() const { return static_cast<int>(agents.size()); }
  int num_atoms() const { return static_cast<int>(atoms.size()); }

  int add_agent(std::string name, Team team) {
    if (find_agent(name)) throw InputError("duplicate agent '" + name + "'");
    agents.push_back(std::move(name));
    teams.push_back(team);
    return num_agents() - 1;
  }

  int add_atom(std::string name) {
    if (auto id = find_atom(name)) return *id;
    if (num_atoms() >= kMaxAtoms) throw InputError("too many atoms (limit 64)");
    atoms.push_back(std::move(name));
    return num_atoms() - 1;
  }

  std::optional<int> find_agent(std::string_view name) const {
    for (int i = 0; i < num_agents(); ++i)
      if (agents[i] == name) return i;
    return std::nullopt;
  }
  std::optional<int> find_atom(std::string_view name) const {
    for (int i = 0; i < num_atoms(); ++i)
      if (atoms[i] == name) return i;
    return std::nullopt;
  }

  std::vector<int> team_members(Team t) const {
    std::vector<int> out;
    for (int i = 0; i < num_agents(); ++i)
      if (teams[i] == t) out.push_back(i);
    return out;
  }

  std::string format_atoms(AtomSet s) const {
    std::string out = "{";
    bool first = true;
    for (int i = 0; i < num_atoms(); ++i) {
      if (!has_atom(s, i)) continue;
      if (!first) out += ", ";
      out += atoms[i];
      first = false;
    }
    return out + "}";
  }
};

}  // namespace delgames

#endif
