#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "phest/errors.hpp"

namespace phest {

struct DiagramPoint {
  int degree = 0;
  double birth = 0.0;
  double death = std::numeric_limits<double>::infinity();

  bool essential() const { return std::isinf(death); }
  double lifetime() const { return death - birth; }

  friend bool operator<(const DiagramPoint& a, const DiagramPoint& b) {
    return std::tie(a.degree, a.birth, a.death) < std::tie(b.degree, b.birth, b.death);
  }
  friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
};

/// Multiset of (degree, birth, death) with death in R or +inf.
struct PersistenceDiagram {
  std::vector<DiagramPoint> points;

  void add(int degree, double birth, double death) {
    if (death < birth) throw ConsistencyError("PersistenceDiagram: death precedes birth");
    points.push_back({degree, birth, death});
  }

  std::vector<DiagramPoint> degree(int s) const {
    std::vector<DiagramPoint> out;
    for (const auto& p : points) {
      if (p.degree == s) out.push_back(p);
    }
    return out;
  }

  int max_degree() const {
    int m = -1;
    for (const auto& p : points) m = std::max(m, p.degree);
    return m;
  }

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Points sorted by (degree, birth, death); the canonical multiset representative.
  PersistenceDiagram canonical() const {
    PersistenceDiagram out = *this;
    std::sort(out.points.begin(), out.points.end());
    return out;
  }

  friend bool operator==(const PersistenceDiagram& a, const PersistenceDiagram& b) {
    return a.canonical().points == b.canonical().points;
  }
};

inline std::ostream& operator<<(std::ostream& os, const DiagramPoint& p) {
  return os << "H" << p.degree << "(" << p.birth << ", " << p.death << ")";
}

inline std::ostream& operator<<(std::ostream& os, const PersistenceDiagram& d) {
  os << "{";
  bool first = true;
  for (const auto& p : d.canonical().points) {
    os << (first ? "" : ", ") << p;
    first = false;
  }
  return os << "}";
}

// ---- CSV: header "degree,birth,death", death "inf" for essential classes ------

inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

inline void write_diagram_csv(std::ostream& os, const PersistenceDiagram& d) {
  os << "degree,birth,death\n";
  for (const auto& p : d.canonical().points) {
    os << p.degree << ',' << format_real(p.birth) << ',' << format_real(p.death) << '\n';
  }
}

inline void write_diagram_csv(const std::string& path, const PersistenceDiagram& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_diagram_csv(out, d);
}

inline double parse_real(const std::string& token) {
  if (token == "inf" || token == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ValidationError("diagram CSV: bad number '" + token + "'");
  }
  if (used != token.size()) throw ValidationError("diagram CSV: bad number '" + token + "'");
  return v;
}

inline PersistenceDiagram read_diagram_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("diagram CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "degree,birth,death") throw ValidationError("diagram CSV: expected header degree,birth,death");
  PersistenceDiagram d;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string deg, birth, death;
    if (!std::getline(ss, deg, ',') || !std::getline(ss, birth, ',') || !std::getline(ss, death)) {
      throw ValidationError("diagram CSV: malformed row '" + line + "'");
    }
    const double b = parse_real(birth);
    const double e = parse_real(death);
    if (std::isinf(b)) throw ValidationError("diagram CSV: birth must be finite");
    if (e < b) throw ValidationError("diagram CSV: death precedes birth");
    d.points.push_back({static_cast<int>(parse_real(deg)), b, e});
  }
  return d;
}

inline PersistenceDiagram read_diagram_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return read_diagram_csv(in);
}

}  // namespace phest
