#include "caplab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "caplab/bounds.hpp"
#include "caplab/errors.hpp"
#include "caplab/one_vertex.hpp"
#include "caplab/oracle.hpp"

namespace caplab {

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::standard: return "standard";
    case OpKind::periodic: return "periodic";
    case OpKind::one_vertex: return "one-vertex";
  }
  return "?";
}

OpKind parse_op_kind(const std::string& text) {
  if (text == "standard") return OpKind::standard;
  if (text == "periodic") return OpKind::periodic;
  if (text == "one-vertex") return OpKind::one_vertex;
  throw std::invalid_argument("unknown operator kind '" + text + "' (expected standard|periodic|one-vertex)");
}

Representation parse_representation(const std::string& text) {
  if (text == "auto" || text == "automatic") return Representation::automatic;
  if (text == "lists" || text == "successor-lists") return Representation::successor_lists;
  if (text == "bitset" || text == "bitset-rows") return Representation::bitset_rows;
  if (text == "matrix-free") return Representation::matrix_free;
  throw std::invalid_argument("unknown representation '" + text + "' (expected auto|lists|bitset|matrix-free)");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("not an integer list: '" + text + "'");
    return v;
  };
  while (std::getline(ss, part, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_int(part));
      continue;
    }
    const int lo = to_int(part.substr(0, dots));
    const int hi = to_int(part.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty range '" + part + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

ConstraintSystem resolve_model(const ExperimentConfig& cfg) {
  if (!cfg.model_file.empty()) return load_system(cfg.model_file);
  if (cfg.model == "hard-square") return hard_square_system(2);
  if (cfg.model == "hard-square-3d") return hard_square_system(3);
  if (cfg.model == "monomer-dimer") {
    if (cfg.model_d < 1) throw std::invalid_argument("monomer-dimer needs --d >= 1");
    return monomer_dimer_system(cfg.model_d, cfg.same_axis_chain);
  }
  if (std::filesystem::is_regular_file(cfg.model)) return load_system(cfg.model);
  throw std::invalid_argument("unknown model '" + cfg.model + "' (see list-models)");
}

std::string model_label(const ExperimentConfig& cfg) {
  if (!cfg.model_file.empty()) return "file:" + cfg.model_file.filename().string();
  if (cfg.model == "monomer-dimer") {
    return "monomer-dimer-d" + std::to_string(cfg.model_d) + (cfg.same_axis_chain ? "" : "-literal");
  }
  return cfg.model;
}

void ExperimentConfig::validate() const {
  iteration.validate();
  if (format != "csv" && format != "json" && format != "text") {
    throw std::invalid_argument("unknown format '" + format + "' (expected csv|json|text)");
  }
  for (int v : n)
    if (v < 1) throw std::invalid_argument("--n values must be >= 1");
  for (const auto* list : {&n1, &n2})
    for (int v : *list)
      if (v < 1) throw std::invalid_argument("slab sides must be >= 1");
  if (max_n < 1) throw std::invalid_argument("--max-n must be >= 1");
}

std::string list_models() {
  std::ostringstream os;
  os << "hard-square (k=2)          2D, edges 1-2 2-1 2-2 on both axes\n";
  os << "hard-square-3d (k=2)       3D, same graph on all three axes\n";
  for (int d = 1; d <= 3; ++d) {
    os << "monomer-dimer d=" << d << " (k=" << 2 * d + 1 << ")    --model monomer-dimer --d " << d << "\n";
  }
  os << "file (k from file)         --model-file <path>\n";
  return os.str();
}

namespace {

using Clock = std::chrono::steady_clock;

struct Row {
  std::string op_kind, geometry, boundary;
  std::size_t states = 0;
  SpectralEstimate est;
  double seconds = 0;
};

double vector_bytes(std::size_t m, unsigned digits) {
  // Two iteration vectors; an MPFR value holds its header plus limbs.
  const double limbs = std::ceil(digits * 3.3219280948873623 / 64.0) + 1;
  return 2.0 * static_cast<double>(m) * (32.0 + 8.0 * limbs);
}

template <class Op>
Row run_spectrum(const Op& op, const ExperimentConfig& cfg, const std::string& kind, const std::string& geometry,
                 const std::string& boundary, std::ostream& log) {
  Row row{kind, geometry, boundary, op.dimension(), {}, 0};
  log << "  " << kind << " " << geometry << " " << boundary << ": " << op.dimension() << " states, "
      << op.nonzeros() << " nonzeros, ~" << std::fixed << std::setprecision(1)
      << vector_bytes(op.dimension(), cfg.iteration.precision_digits) / 1048576.0 << " MiB vectors"
      << std::defaultfloat << "\n";
  const auto t0 = Clock::now();
  row.est = perron_radius(op, cfg.iteration);
  row.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  log << "    " << row.est.iterations << " iterations, gap " << format_real(row.est.relative_gap(), 3) << ", "
      << (row.est.converged ? "converged" : "NOT converged") << ", " << std::fixed << std::setprecision(3)
      << row.seconds << " s" << std::defaultfloat << "\n";
  return row;
}

std::vector<Row> compute_rows(const ConstraintSystem& sys, const ExperimentConfig& cfg, std::ostream& log) {
  std::vector<Row> rows;
  const int dim = sys.dimension();
  BuildOptions build;
  build.representation = cfg.representation;
  OneVertexOptions ov;
  ov.workers = cfg.iteration.workers;

  if (dim == 2) {
    if (cfg.n.empty()) throw std::invalid_argument("2D models need --n");
    for (int n : cfg.n) {
      const std::string geom = std::to_string(n);
      if (cfg.op == OpKind::one_vertex) {
        rows.push_back(run_spectrum(build_one_vertex_2d(sys, n, ov), cfg, "one-vertex", geom, "slanted", log));
      } else {
        const Boundary b = cfg.op == OpKind::periodic ? Boundary::periodic : cfg.boundary.axis1;
        rows.push_back(run_spectrum(build_row_transfer_2d(sys, n, b, build), cfg, to_string(cfg.op), geom, to_string(b), log));
      }
    }
  } else if (dim == 3) {
    if (cfg.n1.empty() || cfg.n2.empty()) throw std::invalid_argument("3D models need --n1 and --n2");
    for (int a : cfg.n1) {
      for (int b : cfg.n2) {
        const std::string geom = std::to_string(a) + "x" + std::to_string(b);
        if (cfg.op == OpKind::one_vertex) {
          rows.push_back(run_spectrum(build_one_vertex_3d(sys, a, b, ov), cfg, "one-vertex", geom, "helical", log));
        } else {
          BoundaryDescriptor bc = cfg.boundary;
          if (cfg.op == OpKind::periodic) bc = {Boundary::periodic, Boundary::periodic};
          rows.push_back(run_spectrum(build_slab_transfer_3d(sys, a, b, bc, build), cfg, to_string(cfg.op), geom,
                                      std::string(to_string(bc.axis1)) + "/" + to_string(bc.axis2), log));
        }
      }
    }
  } else {
    throw std::invalid_argument("spectral tasks need a 2D or 3D model, got d=" + std::to_string(dim));
  }
  return rows;
}

void write_rows(const std::vector<Row>& rows, const ExperimentConfig& cfg, std::ostream& os) {
  const int digits = static_cast<int>(cfg.iteration.precision_digits);
  const std::string model = model_label(cfg);
  if (cfg.format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json j;
      j["model"] = model;
      j["op_kind"] = r.op_kind;
      j["geometry"] = r.geometry;
      j["boundary"] = r.boundary;
      j["precision"] = cfg.iteration.precision_digits;
      j["states"] = r.states;
      j["value"] = format_real(r.est.value, digits);
      j["cw_lower"] = format_real(r.est.cw_lower, digits);
      j["cw_upper"] = format_real(r.est.cw_upper, digits);
      j["iterations"] = r.est.iterations;
      j["converged"] = r.est.converged;
      if (cfg.timing) j["seconds"] = r.seconds;
      arr.push_back(std::move(j));
    }
    os << arr.dump(2) << "\n";
    return;
  }
  os << "model,op_kind,geometry,boundary,precision,value,cw_lower,cw_upper,iterations,seconds\n";
  for (const auto& r : rows) {
    os << model << ',' << r.op_kind << ',' << r.geometry << ',' << r.boundary << ',' << cfg.iteration.precision_digits
       << ',' << format_real(r.est.value, digits) << ',' << format_real(r.est.cw_lower, digits) << ','
       << format_real(r.est.cw_upper, digits) << ',' << r.est.iterations << ',';
    if (cfg.timing) os << std::fixed << std::setprecision(3) << r.seconds << std::defaultfloat;
    os << '\n';
  }
}

// --- bounds ----------------------------------------------------------------

std::vector<EntropyBound> bounds_2d(const ConstraintSystem& sys, const ExperimentConfig& cfg, std::ostream& log,
                                    bool& all_converged, HeuristicBracket* heuristic) {
  if (!sys.isotropic() || !sys.symmetric()) {
    throw std::invalid_argument("2D bounds need an isotropic symmetric system (rigorous lower bounds assume it)");
  }
  if (cfg.n.empty()) throw std::invalid_argument("bounds need --n (the range of strip widths)");
  BuildOptions build;
  build.representation = cfg.representation;
  std::map<int, SpectralEstimate> open, per;
  for (int n : cfg.n) {
    open[n] = run_spectrum(build_row_transfer_2d(sys, n, Boundary::open, build), cfg, "standard", std::to_string(n), "open", log).est;
    per[n] = run_spectrum(build_row_transfer_2d(sys, n, Boundary::periodic, build), cfg, "periodic", std::to_string(n), "periodic", log).est;
  }
  per[0] = run_spectrum(adjacency_operator(sys.axis(0)), cfg, "adjacency", "1", "-", log).est;
  for (const auto& m : {&open, &per})
    for (const auto& [n, e] : *m) all_converged = all_converged && e.converged;

  std::vector<EntropyBound> out;
  auto usable = [](const SpectralEstimate& e) { return e.converged && e.positive; };
  for (const auto& [n, e] : open) {
    if (usable(e)) out.push_back(upper_bound_open_2d(e, n));
  }
  for (const auto& [big, eb] : open) {
    for (int q = 0; 2 * q + 1 < big; ++q) {
      const int small = 2 * q + 1;
      const auto it = open.find(small);
      if (it == open.end() || !usable(eb) || !usable(it->second)) continue;
      out.push_back(lower_bound_open_2d(eb, it->second, big - small, q));
    }
  }
  for (const auto& [n, e] : per) {
    if (n > 0 && n % 2 == 0 && usable(e)) out.push_back(upper_bound_periodic_2d(e, n));
  }
  for (const auto& [big, eb] : per) {
    for (int q = 0; 2 * q < big; ++q) {
      const auto it = per.find(2 * q);
      if (it == per.end() || !usable(eb) || !usable(it->second)) continue;
      out.push_back(lower_bound_periodic_2d(eb, it->second, big - 2 * q, q));
    }
  }
  if (!cfg.one_vertex_n.empty()) {
    OneVertexOptions ov;
    ov.workers = cfg.iteration.workers;
    std::vector<std::pair<int, SpectralEstimate>> values;
    for (int n : cfg.one_vertex_n) {
      const auto est = run_spectrum(build_one_vertex_2d(sys, n, ov), cfg, "one-vertex", std::to_string(n), "slanted", log).est;
      all_converged = all_converged && est.converged;
      values.emplace_back(n, est);
    }
    *heuristic = heuristic_bracket_2d(values);
    if (heuristic->violation) log << "  heuristic bracket withheld: " << *heuristic->violation << "\n";
    if (heuristic->lower) out.push_back(*heuristic->lower);
    if (heuristic->upper) out.push_back(*heuristic->upper);
  }
  return out;
}

std::vector<EntropyBound> bounds_3d(const ConstraintSystem& sys, const ExperimentConfig& cfg, std::ostream& log,
                                    bool& all_converged) {
  if (!sys.isotropic() || !sys.symmetric()) throw std::invalid_argument("3D bounds need an isotropic symmetric system");
  if (cfg.n1.empty() || cfg.n2.empty()) throw std::invalid_argument("3D bounds need --n1 and --n2 (torus sides)");
  BuildOptions build;
  build.representation = cfg.representation;
  std::vector<EntropyBound> out;
  for (int a : cfg.n1) {
    for (int b : cfg.n2) {
      if (a % 2 || b % 2) {
        log << "  skipping torus " << a << "x" << b << ": the periodic upper bound needs even sides\n";
        continue;
      }
      const auto est = run_spectrum(build_slab_transfer_3d(sys, a, b, {Boundary::periodic, Boundary::periodic}, build),
                                    cfg, "periodic", std::to_string(a) + "x" + std::to_string(b), "periodic/periodic", log)
                           .est;
      all_converged = all_converged && est.converged;
      if (est.converged && est.positive) out.push_back(upper_bound_periodic_3d(est, a, b));
    }
  }
  return out;
}

// --- oracle-check ----------------------------------------------------------

struct CheckLog {
  std::ostream& os;
  int failures = 0;
  void expect_equal(const std::string& what, const BigInt& a, const BigInt& b) {
    const bool ok = a == b;
    failures += ok ? 0 : 1;
    os << (ok ? "PASS " : "FAIL ") << what << ": " << a << (ok ? " == " : " != ") << b << "\n";
  }
  void expect_le(const std::string& what, const BigInt& a, const BigInt& b) {
    const bool ok = a <= b;
    failures += ok ? 0 : 1;
    os << (ok ? "PASS " : "FAIL ") << what << ": " << a << (ok ? " <= " : " > ") << b << "\n";
  }
};

int oracle_check(const ConstraintSystem& sys, const ExperimentConfig& cfg, std::ostream& os) {
  CheckLog check{os};
  const int top = cfg.max_n;
  const auto guards = GuardLimits::from_environment();
  if (sys.dimension() == 2) {
    for (int n = 1; n <= top; ++n) {
      const auto t_open = build_row_transfer_2d(sys, n, Boundary::open);
      const auto t_per = build_row_transfer_2d(sys, n, Boundary::periodic);
      for (int q = 1; q <= top; ++q) {
        const std::string g = "(" + std::to_string(n) + "," + std::to_string(q) + ")";
        check.expect_equal("1' T_" + std::to_string(n) + "^" + std::to_string(q - 1) + " 1 = box " + g,
                           quadratic_form_count(t_open, static_cast<unsigned>(q - 1)),
                           brute_count_box(sys, {n, q}, {Boundary::open, Boundary::open}, guards).value);
        check.expect_equal("1' Tper_" + std::to_string(n) + "^" + std::to_string(q - 1) + " 1 = cylinder " + g,
                           quadratic_form_count(t_per, static_cast<unsigned>(q - 1)),
                           brute_count_box(sys, {n, q}, {Boundary::periodic, Boundary::open}, guards).value);
        if (n < 2) continue;
        const auto s = build_one_vertex_2d(sys, n);
        const BigInt walks = quadratic_form_count(s, static_cast<unsigned>((q - 1) * n));
        check.expect_equal("1' S_" + std::to_string(n) + "^" + std::to_string((q - 1) * n) + " 1 = slanted " + g, walks,
                           brute_count_slanted_2d(sys, n, q, guards).value);
        if (sys.isotropic() && sys.symmetric()) {
          check.expect_le("slanted " + g + " <= box", walks, quadratic_form_count(t_open, static_cast<unsigned>(q - 1)));
          check.expect_le("cylinder (" + std::to_string(n - 1) + "," + std::to_string(q) + ") <= slanted",
                          quadratic_form_count(build_row_transfer_2d(sys, n - 1, Boundary::periodic),
                                               static_cast<unsigned>(q - 1)),
                          walks);
        }
      }
    }
  } else if (sys.dimension() == 3) {
    const int t3 = std::min(top, 3);
    for (int a = 1; a <= t3; ++a)
      for (int b = 1; b <= t3; ++b) {
        const auto t = build_slab_transfer_3d(sys, a, b, {});
        for (int m = 1; m <= t3; ++m) {
          check.expect_equal("1' T_(" + std::to_string(a) + "," + std::to_string(b) + ")^" + std::to_string(m - 1) +
                                 " 1 = box (" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(m) + ")",
                             quadratic_form_count(t, static_cast<unsigned>(m - 1)),
                             brute_count_box(sys, {a, b, m}, {Boundary::open, Boundary::open, Boundary::open}, guards).value);
        }
      }
    const auto p = build_one_vertex_3d(sys, 2, 2);
    for (int m = 1; m <= t3; ++m) {
      check.expect_equal("1' P_(2,2)^" + std::to_string(4 * (m - 1)) + " 1 = slanted (2,2," + std::to_string(m) + ")",
                         quadratic_form_count(p, static_cast<unsigned>(4 * (m - 1))),
                         brute_count_slanted_3d(sys, 2, 2, m, guards).value);
    }
  } else if (sys.dimension() != 1) {
    throw std::invalid_argument("oracle-check supports 1D, 2D and 3D systems");
  }

  // Monomer-dimer colour coding against direct tilings.
  if (cfg.model_file.empty() && cfg.model == "monomer-dimer") {
    const int d = sys.dimension();
    const int side = std::min(top, 3);
    std::vector<std::vector<int>> boxes;
    if (d == 1) for (int a = 1; a <= 2 * side; ++a) boxes.push_back({a});
    if (d == 2) for (int a = 1; a <= side; ++a) for (int b = 1; b <= side; ++b) boxes.push_back({a, b});
    if (d == 3) boxes.push_back({2, 2, 2});
    for (const auto& box : boxes) {
      std::string g;
      for (int v : box) g += (g.empty() ? "" : ",") + std::to_string(v);
      check.expect_equal("masked colourings = tilings (" + g + ")",
                         brute_count_box_masked(sys, box, monomer_dimer_boundary_masks(box), guards).value,
                         brute_count_monomer_dimer(box, guards).value);
    }
  }
  os << (check.failures == 0 ? "all identities hold\n" : std::to_string(check.failures) + " identities FAILED\n");
  return check.failures == 0 ? exit_code::ok : exit_code::failed_check;
}

int run_task(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log) {
  cfg.validate();
  // Bound arithmetic after the iterations runs at the working precision too.
  PrecisionScope scope(cfg.iteration.precision_digits);
  const ConstraintSystem sys = resolve_model(cfg);
  const auto report = validate_system(sys);
  if (!report.ok()) log << "warning: " << report.describe();
  log << "model " << model_label(cfg) << " (k=" << sys.colours() << ", d=" << sys.dimension() << ")\n";

  switch (cfg.task) {
    case Task::spectrum:
    case Task::sweep: {
      const auto rows = compute_rows(sys, cfg, log);
      write_rows(rows, cfg, out);
      for (const auto& r : rows)
        if (!r.est.converged) return exit_code::not_converged;
      return exit_code::ok;
    }
    case Task::bounds: {
      bool converged = true;
      HeuristicBracket heuristic;
      const auto bounds = sys.dimension() == 2 ? bounds_2d(sys, cfg, log, converged, &heuristic)
                                               : bounds_3d(sys, cfg, log, converged);
      const auto rep = bound_report(bounds);
      const int digits = static_cast<int>(cfg.iteration.precision_digits) - 5;
      out << (cfg.format == "json" ? rep.to_json(digits) : rep.to_text(digits));
      return converged ? exit_code::ok : exit_code::not_converged;
    }
    case Task::oracle_check: return oracle_check(sys, cfg, out);
  }
  return exit_code::config;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log) {
  const auto t0 = Clock::now();
  int code = exit_code::ok;
  try {
    if (cfg.out.empty()) {
      code = run_task(cfg, out, log);
    } else {
      std::ostringstream buffer;
      code = run_task(cfg, buffer, log);
      std::ofstream file(cfg.out, std::ios::binary | std::ios::trunc);
      if (!file) throw std::invalid_argument("cannot write " + cfg.out.string());
      file << buffer.str();
    }
  } catch (const CapacityError& e) {
    log << "error: capacity guard '" << e.guard() << "' refused: estimate " << e.estimate() << " exceeds limit "
        << e.limit() << " (raise CAPACITY_LAB_WORK_LIMIT to override)\n";
    return exit_code::capacity;
  } catch (const NumericalError& e) {
    log << "error: " << e.what() << "\n";
    return exit_code::not_converged;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_code::config;
  }
  if (code == exit_code::not_converged) log << "error: at least one iteration did not converge (raise --max-iter)\n";
  log << "wall time " << std::fixed << std::setprecision(3) << std::chrono::duration<double>(Clock::now() - t0).count()
      << " s\n" << std::defaultfloat;
  return code;
}

}  // namespace caplab
