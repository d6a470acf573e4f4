// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wavepacket/covering.hpp"
#include "wavepacket/covering_audit.hpp"
#include "wavepacket/dspace.hpp"
#include "wavepacket/embeddings.hpp"
#include "wavepacket/fields.hpp"
#include "wavepacket/frames.hpp"
#include "wavepacket/frames_io.hpp"
#include "wavepacket/partition.hpp"
#include "wavepacket/techsums.hpp"

namespace wavepacket::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kPass = 0, kFail = 1, kUnknown = 2, kUsage = 3, kIo = 4;

// Malformed numbers on the command line are usage errors.
inline Scalar scalar_arg(const std::string& text) {
  try {
    return parse_scalar(text);
  } catch (const FormatError& e) {
    throw PreconditionError("invalid number '" + text + "': " + e.what());
  }
}

inline ExtExp exponent_arg(const std::string& text) {
  try {
    return parse_exponent(text);
  } catch (const FormatError& e) {
    throw PreconditionError("invalid exponent '" + text + "': " + e.what());
  }
}

// Reals accept fractions ("4/3") and "inf".
inline double parse_real(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  return scalar_arg(text).value();
}

inline WPIndex parse_index(const std::string& text) {
  if (text == "zero" || text == "0") return WPIndex::zero();
  std::vector<int> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(part, &used));
      if (used != part.size()) throw PreconditionError("");
    } catch (const std::exception&) {
      throw PreconditionError("index must be \"zero\" or j,m,l");
    }
  }
  if (v.size() != 3 || v[0] < 1) throw PreconditionError("index must be \"zero\" or j,m,l with j >= 1");
  return {v[0], v[1], v[2]};
}

inline json index_json(const WPIndex& i) { return index_to_json(i); }

inline json verdict_json(const Verdict& v) {
  json trace = json::array();
  for (const Inequality& in : v.trace) {
    trace.push_back({{"label", in.label},
                     {"lhs", in.lhs},
                     {"rhs", in.rhs},
                     {"lhs_value", in.lhs_value},
                     {"rhs_value", in.rhs_value},
                     {"strict", in.strict},
                     {"holds", in.holds}});
  }
  return {{"verdict", to_string(v.state)}, {"branch", v.branch}, {"reason", v.reason}, {"trace", trace}};
}

inline int verdict_code(const Verdict& v) {
  switch (v.state) {
    case VerdictState::Holds:
      return kPass;
    case VerdictState::Fails:
      return kFail;
    default:
      return kUnknown;
  }
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

namespace detail {

struct SpecOpts {
  std::string alpha = "1", beta = "1", eps = "1/64";
  int jmax = 6;
};

inline void add_spec(CLI::App* c, SpecOpts& s, bool required = true, bool jmax = true) {
  auto* a = c->add_option("--alpha", s.alpha, "alpha in [0,1]")->capture_default_str();
  auto* b = c->add_option("--beta", s.beta, "beta in [0,alpha]")->capture_default_str();
  if (required) {
    a->required();
    b->required();
  }
  c->add_option("--eps", s.eps, "covering overlap epsilon")->capture_default_str();
  if (jmax) c->add_option("--jmax", s.jmax, "truncation level")->capture_default_str();
}

inline CoveringSpec to_spec(const SpecOpts& s) {
  CoveringSpec sp{parse_real(s.alpha), parse_real(s.beta), parse_real(s.eps), 10};
  sp.validate();
  return sp;
}

struct ExpOpts {
  std::string a = "1", b = "1", p = "2", q = "2", s = "0";
};

inline void add_exponents(CLI::App* c, ExpOpts& e, const std::string& n, bool ab = true) {
  if (ab) {
    c->add_option("--a" + n, e.a, "alpha")->capture_default_str();
    c->add_option("--b" + n, e.b, "beta")->capture_default_str();
  }
  c->add_option("--p" + n, e.p, "integrability")->capture_default_str();
  c->add_option("--q" + n, e.q, "summability")->capture_default_str();
  c->add_option("--s" + n, e.s, "smoothness")->capture_default_str();
}

inline Exponents to_exponents(const ExpOpts& e) {
  Exponents x;
  x.alpha = scalar_arg(e.a);
  x.beta = scalar_arg(e.b);
  x.p = exponent_arg(e.p);
  x.q = exponent_arg(e.q);
  x.s = scalar_arg(e.s);
  return x;
}

inline json echo(const CLI::App* app) {
  json in = json::object();
  for (const CLI::Option* o : app->get_options()) {
    const std::string name = o->get_single_name();
    if (name.empty() || name == "help") continue;
    if (o->count() > 0) {
      const auto& r = o->results();
      in[name] = r.size() == 1 ? json(r.front()) : json(r);
    } else if (o->get_expected_min() == 0) {
      in[name] = false;
    } else {
      in[name] = o->get_default_str();
    }
  }
  return in;
}

inline std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct PatchRow {
  WPIndex i;
  double theta, cx, cy, len_radial, len_angular;
};

inline std::vector<PatchRow> patch_rows(const WavePacketCovering& cov) {
  const CoveringSpec& sp = cov.spec();
  std::vector<PatchRow> rows;
  for (std::size_t k = 0; k < cov.size(); ++k) {
    const WPIndex i = cov.index(k);
    const Patch& p = cov.patch(k);
    if (i.is_zero()) {
      rows.push_back({i, 0.0, 0.0, 0.0, 2 * kLowpassOuter, 2 * kLowpassOuter});
    } else {
      rows.push_back({i, theta_jl(i.j, i.l, sp), p.center.x, p.center.y,
                      std::exp2(sp.alpha * i.j) * (1.0 + 2.0 * sp.epsilon),
                      std::exp2(sp.beta * i.j) * (2.0 + 2.0 * sp.epsilon)});
    }
  }
  return rows;
}

inline std::string covering_svg(const WavePacketCovering& cov) {
  double extent = kLowpassOuter;
  for (const Patch& p : cov.patches()) extent = std::max(extent, norm(p.center) + p.radius);
  extent *= 1.02;
  std::ostringstream os;
  os << std::setprecision(8);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << -extent << ' ' << -extent << ' ' << 2 * extent
     << ' ' << 2 * extent << "\">\n";
  os << "<g transform=\"scale(1,-1)\" fill=\"none\" stroke-width=\"" << extent / 800 << "\">\n";
  os << "<circle cx=\"0\" cy=\"0\" r=\"" << kLowpassOuter << "\" stroke=\"black\"/>\n";
  const Rect q = base_outer(cov.spec());
  for (std::size_t k = 1; k < cov.size(); ++k) {
    const Patch& p = cov.patch(k);
    const double hue = 300.0 * (p.level - 1) / std::max(1, cov.j_max() - 1);
    os << "<polygon stroke=\"hsl(" << hue << ",80%,40%)\" points=\"";
    for (const Vec2 c : {Vec2{q.x0, q.y0}, Vec2{q.x1, q.y0}, Vec2{q.x1, q.y1}, Vec2{q.x0, q.y1}}) {
      const Vec2 v = p.map.apply(c);
      os << v.x << ',' << v.y << ' ';
    }
    os << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

inline GeneratorPair generators_for(const CoveringSpec& sp) { return default_generators(sp.epsilon); }

inline Grid2 make_grid(int n, const std::string& half_extent) {
  if (n <= 0) throw PreconditionError("grid size must be positive");
  Grid2 g{static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n), parse_real(half_extent)};
  g.validate();
  return g;
}

}  // namespace detail

class Cli {
 public:
  Cli() : app_("wpspace: (alpha, beta) wave packet smoothness spaces") {
    app_.set_version_flag("--version", kVersion);
    app_.require_subcommand(1);
    build_covering();
    build_partition();
    build_norm();
    build_embed();
    build_frame();
    build_sums();
    build_field();
  }

  int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    out_ = &out;
    try {
      app_.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app_.help();
      return kPass;
    } catch (const CLI::CallForAllHelp&) {
      out << app_.help("", CLI::AppFormatMode::All);
      return kPass;
    } catch (const CLI::CallForVersion&) {
      out << kVersion << '\n';
      return kPass;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      const CLI::App* sub = &app_;
      while (!sub->get_subcommands().empty()) sub = sub->get_subcommands().front();
      err << sub->help();
      return kUsage;
    }
    try {
      return action_();
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    } catch (const PreconditionError& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    } catch (const RangeError& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    } catch (const FormatError& e) {
      err << "error: " << e.what() << '\n';
      return kIo;
    } catch (const std::ios_base::failure& e) {
      err << "error: " << e.what() << '\n';
      return kIo;
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kFail;
    }
  }

 private:
  CLI::App* leaf(CLI::App* parent, const std::string& name, const std::string& desc, std::function<int()> fn) {
    CLI::App* c = parent->add_subcommand(name, desc);
    c->callback([this, c, fn]() {
      current_ = c;
      action_ = fn;
    });
    return c;
  }

  int emit(json body, int code) {
    json doc = {{"version", kVersion}, {"command", command_path()}, {"input", detail::echo(current_)}};
    doc.update(body);
    *out_ << doc.dump(2) << '\n';
    return code;
  }

  std::string command_path() const {
    std::string s;
    for (const CLI::App* a = current_; a != nullptr && a != &app_; a = a->get_parent())
      s = s.empty() ? a->get_name() : a->get_name() + " " + s;
    return s;
  }

  // -------------------------------------------------------------------------
  void build_covering() {
    CLI::App* g = app_.add_subcommand("covering", "wave packet covering");
    g->require_subcommand(1);

    CLI::App* dump = leaf(g, "dump", "list the patches", [this] {
      const WavePacketCovering cov(detail::to_spec(cov_spec_), cov_spec_.jmax);
      if (dump_format_ == "csv") {
        *out_ << "j,m,l,theta,center_x,center_y,len_radial,len_angular\n";
        for (const auto& r : detail::patch_rows(cov)) {
          *out_ << r.i.j << ',' << r.i.m << ',' << r.i.l << ',' << detail::csv_number(r.theta) << ','
                << detail::csv_number(r.cx) << ',' << detail::csv_number(r.cy) << ','
                << detail::csv_number(r.len_radial) << ',' << detail::csv_number(r.len_angular) << '\n';
        }
        return kPass;
      }
      if (dump_format_ == "svg") {
        *out_ << detail::covering_svg(cov);
        return kPass;
      }
      json patches = json::array();
      for (const auto& r : detail::patch_rows(cov)) {
        patches.push_back({{"j", r.i.j},
                           {"m", r.i.m},
                           {"l", r.i.l},
                           {"theta", r.theta},
                           {"center_x", r.cx},
                           {"center_y", r.cy},
                           {"len_radial", r.len_radial},
                           {"len_angular", r.len_angular}});
      }
      return emit({{"count", cov.size()}, {"patches", patches}}, kPass);
    });
    detail::add_spec(dump, cov_spec_);
    dump->add_option("--format", dump_format_, "json, csv or svg")
        ->check(CLI::IsMember({"json", "csv", "svg"}))
        ->capture_default_str();

    CLI::App* verify = leaf(g, "verify", "Monte-Carlo coverage check", [this] {
      const WavePacketCovering cov(detail::to_spec(cov_spec_), cov_spec_.jmax);
      const double radius = verify_radius_.empty() ? -1.0 : parse_real(verify_radius_);
      if (radius > cov.safe_radius()) throw PreconditionError("radius exceeds the truncation-safe radius");
      const CoverageReport r = verify_coverage(cov, samples_, seed_, radius);
      json misses = json::array();
      for (std::size_t k = 0; k < std::min<std::size_t>(10, r.misses.size()); ++k)
        misses.push_back({r.misses[k].x, r.misses[k].y});
      const bool pass = r.misses.empty();
      return emit({{"tested", r.tested},
                   {"misses", r.misses.size()},
                   {"miss_examples", misses},
                   {"radius", radius < 0 ? cov.safe_radius() : radius},
                   {"pass", pass}},
                  pass ? kPass : kFail);
    });
    detail::add_spec(verify, cov_spec_);
    verify->add_option("--samples", samples_, "number of random points")->capture_default_str();
    verify->add_option("--seed", seed_, "sampler seed")->capture_default_str();
    verify->add_option("--radius", verify_radius_, "sampling radius (default: safe radius)");

    CLI::App* nb = leaf(g, "neighbors", "patches meeting a given patch", [this] {
      const WavePacketCovering cov(detail::to_spec(cov_spec_), cov_spec_.jmax);
      const WPIndex i = parse_index(index_);
      json list = json::array();
      for (std::size_t c : cov.neighbors(cov.position(i))) list.push_back(index_json(cov.index(c)));
      return emit({{"index", index_json(i)}, {"count", list.size()}, {"neighbors", list}}, kPass);
    });
    detail::add_spec(nb, cov_spec_);
    nb->add_option("--index", index_, "zero or j,m,l")->required();

    CLI::App* conf = leaf(g, "conformance", "admissibility, transition norms, weights, (alpha,beta) fit", [this] {
      const CoveringSpec sp = detail::to_spec(cov_spec_);
      const WavePacketCovering cov(sp, cov_spec_.jmax);
      const AdmissibilityReport a = admissibility_sweep(cov);
      const ConformanceReport c = alpha_beta_conformance(cov, sp.alpha, sp.beta);
      const double n = sp.n_const;
      json weights = json::object();
      bool weights_ok = true;
      for (int s = -2; s <= 2; ++s) {
        const double r = max_weight_ratio(cov, s);
        weights_ok = weights_ok && r <= std::exp2(3.0 * std::abs(s)) * (1 + 1e-12);
        weights[std::to_string(s)] = r;
      }
      const bool pass = a.max_dj <= 3 && a.max_cluster <= 7 * 5 * 65 * n + 1 && a.lowpass_cluster <= 1 + 135 * n &&
                        a.max_transition_norm <= 104.0 && a.max_distinct_m <= 5 && a.max_distinct_l <= 65 * n &&
                        weights_ok && c.pass();
      return emit({{"pairs", a.pairs},
                   {"max_dj", a.max_dj},
                   {"max_cluster", a.max_cluster},
                   {"lowpass_cluster", a.lowpass_cluster},
                   {"max_distinct_m", a.max_distinct_m},
                   {"max_distinct_l", a.max_distinct_l},
                   {"max_transition_norm", a.max_transition_norm},
                   {"weight_ratio", weights},
                   {"conformance",
                    {{"c_measure", {c.c_measure_lo, c.c_measure_hi}},
                     {"c_radial", c.c_radial},
                     {"c_angular", c.c_angular},
                     {"finite", c.finite},
                     {"stable", c.stable}}},
                   {"pass", pass}},
                  pass ? kPass : kFail);
    });
    detail::add_spec(conf, cov_spec_);
  }

  // -------------------------------------------------------------------------
  void build_partition() {
    CLI::App* g = app_.add_subcommand("partition", "partition of unity");
    g->require_subcommand(1);
    CLI::App* audit = leaf(g, "audit", "normalization, support and derivative audit", [this] {
      const CoveringSpec sp = detail::to_spec(cov_spec_);
      auto cov = std::make_shared<WavePacketCovering>(sp, cov_spec_.jmax);
      const Partition part(cov, profile_ == "exp2" ? BumpProfile::ExpSquared : BumpProfile::Exp);
      const DiscSampler sampler(cov->safe_radius(), seed_);
      double worst = 0.0;
      std::size_t support_violations = 0;
      for (std::uint64_t n = 0; n < samples_part_; ++n) {
        const Vec2 xi = sampler(n);
        worst = std::max(worst, std::abs(part.sum_phi(xi) - 1.0));
        for (std::size_t c : cov->candidates(xi, 0.0))
          if (!patch_contains(cov->patch(c), xi, Which::Outer) && part.eval_phi(c, xi) != 0.0) ++support_violations;
      }
      const DerivativeAudit d = derivative_bound_audit(part, order_);
      json sups = json::object();
      for (std::size_t o = 0; o < d.sup.size(); ++o) {
        json lv = json::object();
        for (const auto& [j, v] : d.sup[o]) lv[std::to_string(j)] = v;
        sups[std::to_string(o)] = {{"levels", lv}, {"overall", d.overall[o]}, {"growth", d.growth[o]}};
      }
      const bool pass = worst <= 1e-10 && support_violations == 0 && d.plateau;
      return emit({{"samples", samples_part_},
                   {"max_sum_error", worst},
                   {"support_violations", support_violations},
                   {"derivatives", sups},
                   {"plateau", d.plateau},
                   {"pass", pass}},
                  pass ? kPass : kFail);
    });
    detail::add_spec(audit, cov_spec_);
    audit->add_option("--samples", samples_part_, "random safe points")->capture_default_str();
    audit->add_option("--seed", seed_, "sampler seed")->capture_default_str();
    audit->add_option("--order", order_, "highest derivative order (<= 2)")->capture_default_str();
    audit->add_option("--profile", profile_, "bump profile: exp or exp2")
        ->check(CLI::IsMember({"exp", "exp2"}))
        ->capture_default_str();
  }

  // -------------------------------------------------------------------------
  void build_norm() {
    CLI::App* c = leaf(&app_, "norm", "decomposition-space quasi-norm of a WPF1 field", [this] {
      const SampledField f = read_field(in_);
      const double p = parse_real(norm_exp_.p), q = parse_real(norm_exp_.q), s = parse_real(norm_exp_.s);
      std::shared_ptr<const Covering> cov;
      if (space_ == "wp") {
        cov = std::make_shared<WavePacketCovering>(detail::to_spec(cov_spec_), cov_spec_.jmax);
      } else if (space_ == "besov") {
        cov = std::make_shared<BesovCovering>(cov_spec_.jmax);
      } else {
        cov = alpha_mod_covering(parse_real(cov_spec_.alpha), cov_spec_.jmax);
      }
      const NormEngine e(cov, f.grid);
      const NormBreakdown b = e.breakdown(dft_forward(f), p, q, s);
      json levels = json::object();
      for (const auto& [j, v] : b.level_norms) levels[std::to_string(j)] = v;
      return emit({{"norm", finite_or_null(b.norm)}, {"leakage", b.leakage}, {"breakdown", levels}}, kPass);
    });
    c->add_option("--in", in_, "WPF1 field")->required();
    c->add_option("--space", space_, "wp, besov or amod")->check(CLI::IsMember({"wp", "besov", "amod"}))->capture_default_str();
    detail::add_spec(c, cov_spec_, false);
    c->add_option("--p", norm_exp_.p)->capture_default_str();
    c->add_option("--q", norm_exp_.q)->capture_default_str();
    c->add_option("--s", norm_exp_.s)->capture_default_str();
  }

  // -------------------------------------------------------------------------
  void build_embed() {
    CLI::App* g = app_.add_subcommand("embed", "embedding decisions");
    g->require_subcommand(1);
    CLI::App* ww = leaf(g, "wp-wp", "wave packet into wave packet", [this] {
      const Verdict v = embed_wp_wp(detail::to_exponents(e1_), detail::to_exponents(e2_));
      return emit(verdict_json(v), verdict_code(v));
    });
    detail::add_exponents(ww, e1_, "1");
    detail::add_exponents(ww, e2_, "2");
    CLI::App* wb = leaf(g, "wp-besov", "wave packet into Besov", [this] {
      const Verdict v = embed_wp_besov(detail::to_exponents(e1_), exponent_arg(e2_.p), exponent_arg(e2_.q),
                                       scalar_arg(e2_.s));
      return emit(verdict_json(v), verdict_code(v));
    });
    detail::add_exponents(wb, e1_, "1");
    detail::add_exponents(wb, e2_, "2", false);
    CLI::App* bw = leaf(g, "besov-wp", "Besov into wave packet", [this] {
      const Verdict v = embed_besov_wp(exponent_arg(e1_.p), exponent_arg(e1_.q), scalar_arg(e1_.s),
                                       detail::to_exponents(e2_));
      return emit(verdict_json(v), verdict_code(v));
    });
    detail::add_exponents(bw, e1_, "1", false);
    detail::add_exponents(bw, e2_, "2");
    CLI::App* ws = leaf(g, "wp-sobolev", "wave packet into W^{k,r}", [this] {
      const Verdict v = embed_wp_sobolev(detail::to_exponents(e1_), sob_k_, exponent_arg(sob_r_));
      return emit(verdict_json(v), verdict_code(v));
    });
    detail::add_exponents(ws, e1_, "1");
    ws->add_option("--k", sob_k_, "Sobolev order")->capture_default_str();
    ws->add_option("--r", sob_r_, "Sobolev integrability")->capture_default_str();
    CLI::App* co = leaf(g, "coincide", "do two wave packet spaces coincide", [this] {
      const Verdict v = coincide(detail::to_exponents(e1_), detail::to_exponents(e2_));
      return emit(verdict_json(v), verdict_code(v));
    });
    detail::add_exponents(co, e1_, "1");
    detail::add_exponents(co, e2_, "2");
  }

  // -------------------------------------------------------------------------
  KappaSet kappa_set() const {
    const auto k = kappa_branch_ == "banach" ? kappa_banach : kappa_atomic;
    return k(parse_real(p0_), parse_real(q0_), parse_real(s0_), parse_real(omega_), parse_real(frame_spec_.alpha),
             parse_real(frame_spec_.beta));
  }

  FrameSystem frame_system(const CoveringSpec& sp, int j_max, const Grid2& g, double delta) const {
    FrameOptions o;
    o.delta = delta;
    o.window_factor = parse_real(window_factor_);
    o.band_radius = band_.empty() ? -1.0 : parse_real(band_);
    return FrameSystem(detail::generators_for(sp), sp, j_max, g, o);
  }

  void add_kappa_opts(CLI::App* c) {
    c->add_option("--p0", p0_)->capture_default_str();
    c->add_option("--q0", q0_)->capture_default_str();
    c->add_option("--omega", omega_)->capture_default_str();
    c->add_option("--s0", s0_)->capture_default_str();
    c->add_option("--branch", kappa_branch_, "atomic or banach")
        ->check(CLI::IsMember({"atomic", "banach"}))
        ->capture_default_str();
    detail::add_spec(c, frame_spec_, true, false);
  }

  void add_frame_opts(CLI::App* c) {
    detail::add_spec(c, frame_spec_);
    c->add_option("--delta", delta_, "lattice density")->capture_default_str();
    c->add_option("--band", band_, "spectral band radius (default: safe radius)");
    c->add_option("--window-factor", window_factor_, "lattice window in grid half-extents")->capture_default_str();
  }

  void build_frame() {
    CLI::App* g = app_.add_subcommand("frame", "discrete wave packet frames");
    g->require_subcommand(1);

    CLI::App* kap = leaf(g, "kappa", "decay exponents", [this] {
      const KappaSet k = kappa_set();
      return emit({{"N0", k.n0},
                   {"kappa0", k.kappa0},
                   {"kappa0_prime", k.kappa0_prime},
                   {"kappa1", k.kappa1},
                   {"kappa2", k.kappa2},
                   {"radial_exponent", k.radial_exponent()}},
                  kPass);
    });
    add_kappa_opts(kap);

    CLI::App* dc = leaf(g, "decay-check", "generator decay against the kappa bound", [this] {
      const KappaSet k = kappa_set();
      const CoveringSpec sp{parse_real(frame_spec_.alpha), parse_real(frame_spec_.beta), parse_real(frame_spec_.eps)};
      const GeneratorPair gen = detail::generators_for(sp);
      const SpectralWindow w = window_ == "phi" ? gen.phi_hat : window_ == "gaussian" ? gaussian_window() : gen.gamma_hat;
      DecayGrid grid;
      grid.radial = decay_radial_;
      grid.angular = decay_angular_;
      grid.r_max = parse_real(decay_rmax_);
      const DecayReport r = check_decay(w, k, deriv_ < 0 ? k.n0 : deriv_, grid);
      return emit({{"ok", r.ok},
                   {"constant", finite_or_null(r.worst_ratio)},
                   {"at", {r.at.x, r.at.y}},
                   {"derivative", {r.dx, r.dy}},
                   {"points", r.points},
                   {"N0", k.n0}},
                  r.ok ? kPass : kFail);
    });
    add_kappa_opts(dc);
    dc->add_option("--window", window_, "gamma, phi or gaussian")
        ->check(CLI::IsMember({"gamma", "phi", "gaussian"}))
        ->capture_default_str();
    dc->add_option("--deriv", deriv_, "highest derivative order (default N0)");
    dc->add_option("--radial", decay_radial_)->capture_default_str();
    dc->add_option("--angular", decay_angular_)->capture_default_str();
    dc->add_option("--rmax", decay_rmax_)->capture_default_str();

    CLI::App* an = leaf(g, "analyze", "frame coefficients of a WPF1 field", [this] {
      const SampledField f = read_field(in_);
      const CoveringSpec sp = detail::to_spec(frame_spec_);
      const FrameSystem fs = frame_system(sp, frame_spec_.jmax, f.grid, parse_real(delta_));
      const CoefficientTensor c = fs.analysis(f);
      if (!out_path_.empty()) write_tensor(c, out_path_);
      return emit({{"atoms", fs.atom_count()},
                   {"coefficients", c.count()},
                   {"band_radius", fs.band_radius()},
                   {"edge_fraction", fs.window_edge_fraction(c)},
                   {"coefficient_norm_l2", coefficient_norm(c, {sp.alpha, sp.beta, 2.0, 2.0, 0.0})},
                   {"out", out_path_}},
                  kPass);
    });
    add_frame_opts(an);
    an->add_option("--in", in_, "WPF1 field")->required();
    an->add_option("--out", out_path_, "coefficient JSON output");

    CLI::App* sy = leaf(g, "synthesize", "field from frame coefficients", [this] {
      const CoefficientTensor c = read_tensor(in_);
      const FrameSystem fs = frame_system(c.spec, c.j_max, c.grid, c.delta);
      const CoefficientTensor ref = fs.empty_tensor();
      if (ref.blocks.size() != c.blocks.size()) throw FormatError("coefficient blocks do not match the frame system");
      for (std::size_t n = 0; n < c.blocks.size(); ++n) {
        const auto &a = c.blocks[n], &b = ref.blocks[n];
        if (!(a.index == b.index) || a.k1 != b.k1 || a.k2 != b.k2)
          throw FormatError("coefficient block " + to_string(a.index) + " does not match the frame system");
      }
      const SampledField f = fs.synthesis(c);
      write_field(f, out_path_);
      return emit({{"out", out_path_}, {"l2", lp_norm(f, 2.0)}, {"atoms", fs.atom_count()}}, kPass);
    });
    sy->add_option("--in", in_, "coefficient JSON")->required();
    sy->add_option("--out", out_path_, "WPF1 output")->required();
    sy->add_option("--band", band_, "spectral band radius used for analysis");
    sy->add_option("--window-factor", window_factor_)->capture_default_str();

    CLI::App* rt = leaf(g, "roundtrip", "CG reconstruction through the frame operator", [this] {
      const CoveringSpec sp = detail::to_spec(frame_spec_);
      const SampledField f = [&] {
        if (!in_.empty()) return read_field(in_);
        if (!seed_given_->count()) throw CLI::ValidationError("--seed", "required when --in is absent");
        BandlimitedOptions o;
        o.band = parse_real(field_band_);
        o.packets = packets_;
        return random_bandlimited(detail::make_grid(grid_n_, grid_l_), seed_, o);
      }();
      const FrameSystem fs = frame_system(sp, frame_spec_.jmax, f.grid, parse_real(delta_));
      const ReconstructResult r = fs.reconstruct(f, iters_, parse_real(tol_));
      if (!out_path_.empty()) write_field(r.recon, out_path_);
      const bool pass = r.rel_error <= parse_real(target_);
      return emit({{"rel_error", r.rel_error},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"atoms", fs.atom_count()},
                   {"coefficients", fs.coefficient_count()},
                   {"pass", pass}},
                  pass ? kPass : kFail);
    });
    add_frame_opts(rt);
    rt->add_option("--in", in_, "WPF1 field (default: seeded random band-limited field)");
    seed_given_ = rt->add_option("--seed", seed_, "seed for the generated field");
    rt->add_option("--n", grid_n_, "generated grid size")->capture_default_str();
    rt->add_option("--L", grid_l_, "generated grid half extent")->capture_default_str();
    rt->add_option("--field-band", field_band_, "generated field band")->capture_default_str();
    rt->add_option("--packets", packets_, "generated field packets")->capture_default_str();
    rt->add_option("--iters", iters_, "CG iterations")->capture_default_str();
    rt->add_option("--tol", tol_, "CG relative residual tolerance")->capture_default_str();
    rt->add_option("--target", target_, "pass threshold for rel_error")->capture_default_str();
    rt->add_option("--out", out_path_, "WPF1 output of the reconstruction");
  }

  // -------------------------------------------------------------------------
  void build_sums() {
    CLI::App* g = app_.add_subcommand("sums", "technical sums and appendix audits");
    g->require_subcommand(1);

    CLI::App* au = leaf(g, "audit", "row and column sups of the target estimate", [this] {
      const CoveringSpec sp = detail::to_spec(sums_spec_);
      SumParams p = minimal_params(sp, parse_real(sum_s_), parse_real(sigma_), parse_real(tau_));
      if (!kappa0_.empty()) p.kappa0 = parse_real(kappa0_);
      if (!kappa1_.empty()) p.kappa1 = parse_real(kappa1_);
      if (!kappa2_.empty()) p.kappa2 = parse_real(kappa2_);
      SumsOptions o;
      o.quad_order = quad_;
      const TargetReport r = audit_target_estimate(p, sp, sums_spec_.jmax, o);
      json rows = json::object(), cols = json::object();
      for (const auto& [d, v] : r.row_bands) rows[std::to_string(d)] = v;
      for (const auto& [d, v] : r.col_bands) cols[std::to_string(d)] = v;
      json body = {{"row_sup", r.row_sup},
                   {"col_sup", r.col_sup},
                   {"B", r.b},
                   {"row_arg", index_json(r.row_arg)},
                   {"col_arg", index_json(r.col_arg)},
                   {"bands", {{"row", rows}, {"col", cols}}},
                   {"band_decay", r.band_decay()},
                   {"remainder", r.remainder},
                   {"kappa", {{"kappa0", p.kappa0}, {"kappa1", p.kappa1}, {"kappa2", p.kappa2}}},
                   {"within_bound", r.within_bound()}};
      bool pass = r.within_bound();
      if (plateau_) {
        const PlateauReport pl = audit_plateau(p, sp, std::max(1, sums_spec_.jmax - 2), sums_spec_.jmax - 1, o);
        const double row_prev = pl.runs.back().row_sup, col_prev = pl.runs.back().col_sup;
        const double rg = r.row_sup / row_prev - 1.0, cg = r.col_sup / col_prev - 1.0;
        body["plateau"] = {{"row_growth", rg}, {"col_growth", cg}, {"ok", rg < 0.01 && cg < 0.01}};
        pass = pass && rg < 0.01 && cg < 0.01;
      }
      body["pass"] = pass;
      return emit(body, pass ? kPass : kFail);
    });
    detail::add_spec(au, sums_spec_);
    sums_spec_.jmax = 5;
    au->add_option("--sigma", sigma_)->capture_default_str();
    au->add_option("--tau", tau_)->capture_default_str();
    au->add_option("--s", sum_s_)->capture_default_str();
    au->add_option("--kappa0", kappa0_, "override the minimal kappa0");
    au->add_option("--kappa1", kappa1_, "override the minimal kappa1");
    au->add_option("--kappa2", kappa2_, "override the minimal kappa2");
    au->add_option("--quad", quad_, "Gauss order per triangle")->capture_default_str();
    au->add_flag("--plateau", plateau_, "also compare with the previous truncation level");

    CLI::App* ap = leaf(g, "appendix", "appendix lemma audits", [this] {
      AppendixOptions o;
      o.seed = seed_;
      o.lemma_draws = draws_;
      o.omega_pairs = pairs_;
      o.omega_samples = omega_samples_;
      const AppendixReport r = audit_appendix(o);
      json trig = json::object();
      for (const auto& [k, v] : r.trig.violations) trig[k] = v;
      return emit({{"sum_estimate",
                    {{"checked", r.sum_checked}, {"violations", r.sum_violations}, {"worst_ratio", r.sum_worst_ratio}}},
                   {"main_lemma",
                    {{"checked", r.lemma_checked},
                     {"violations", r.lemma_violations},
                     {"worst_ratio", r.lemma_worst_ratio}}},
                   {"trig", {{"checked", r.trig.checked}, {"violations", trig}, {"worst_margin", r.trig.worst_margin}}},
                   {"omega_inclusion",
                    {{"pairs", r.omega_pairs}, {"samples", r.omega_samples}, {"violations", r.omega_violations}}},
                   {"pass", r.ok()}},
                  r.ok() ? kPass : kFail);
    });
    ap->add_option("--seed", seed_)->capture_default_str();
    ap->add_option("--draws", draws_, "main lemma parameter draws")->capture_default_str();
    ap->add_option("--pairs", pairs_, "intersecting pairs for the inclusion audit")->capture_default_str();
    ap->add_option("--samples", omega_samples_, "samples per pair")->capture_default_str();
  }

  // -------------------------------------------------------------------------
  void build_field() {
    CLI::App* g = app_.add_subcommand("field", "WPF1 test fields");
    g->require_subcommand(1);

    CLI::App* mk = leaf(g, "make", "write a test field", [this] {
      const Grid2 grid = detail::make_grid(grid_n_, grid_l_);
      SampledField f(grid);
      if (kind_ == "gaussian") {
        f = gaussian_field(grid, parse_real(scale_));
      } else if (kind_ == "bump") {
        f = patch_field(parse_index(index_), detail::to_spec(field_spec_), grid);
      } else if (kind_ == "generator") {
        const CoveringSpec sp = detail::to_spec(field_spec_);
        f = generator_field(parse_index(index_), detail::generators_for(sp), sp, grid);
      } else {
        if (!field_seed_->count()) throw CLI::ValidationError("--seed", "required for random fields");
        BandlimitedOptions o;
        o.band = parse_real(field_band_);
        o.packets = packets_;
        if (o.band + o.taper > grid.nyquist_radius()) throw PreconditionError("Nyquist violation: band exceeds the grid");
        f = random_bandlimited(grid, seed_, o);
      }
      write_field(f, out_path_);
      return emit({{"out", out_path_},
                   {"nx", grid.nx},
                   {"ny", grid.ny},
                   {"half_extent", grid.half_extent},
                   {"l2", lp_norm(f, 2.0)}},
                  kPass);
    });
    mk->add_option("--kind", kind_, "gaussian, bump, generator or random-bandlimited")
        ->check(CLI::IsMember({"gaussian", "bump", "generator", "random-bandlimited"}))
        ->required();
    mk->add_option("--out", out_path_, "WPF1 output")->required();
    mk->add_option("--n", grid_n_, "grid size")->capture_default_str();
    mk->add_option("--L", grid_l_, "grid half extent")->capture_default_str();
    mk->add_option("--scale", scale_, "Gaussian width")->capture_default_str();
    mk->add_option("--index", index_, "patch or generator index")->capture_default_str();
    field_spec_.alpha = "1/2";
    field_spec_.beta = "3/10";
    detail::add_spec(mk, field_spec_, false, false);
    field_seed_ = mk->add_option("--seed", seed_, "seed for random fields");
    mk->add_option("--band", field_band_, "random field band")->capture_default_str();
    mk->add_option("--packets", packets_, "random field packets")->capture_default_str();

    CLI::App* info = leaf(g, "info", "describe a WPF1 field", [this] {
      const SampledField f = read_field(in_);
      const SpectralField s = dft_forward(f);
      double total = 0.0, radius = 0.0, peak = 0.0;
      for (const cplx& z : s.values) total += std::norm(z);
      for (std::size_t gy = 0; gy < f.grid.ny; ++gy)
        for (std::size_t gx = 0; gx < f.grid.nx; ++gx)
          if (std::norm(s.at(gx, gy)) > 1e-24 * total)
            radius = std::max(radius, std::hypot(f.grid.xi_x(gx), f.grid.xi_y(gy)));
      for (const cplx& z : f.samples) peak = std::max(peak, std::abs(z));
      return emit({{"nx", f.grid.nx},
                   {"ny", f.grid.ny},
                   {"half_extent", f.grid.half_extent},
                   {"nyquist_radius", f.grid.nyquist_radius()},
                   {"l2", lp_norm(f, 2.0)},
                   {"linf", peak},
                   {"spectral_radius", radius}},
                  kPass);
    });
    info->add_option("--in", in_, "WPF1 field")->required();
  }

  CLI::App app_;
  CLI::App* current_ = nullptr;
  std::function<int()> action_;
  std::ostream* out_ = &std::cout;

  detail::SpecOpts cov_spec_, frame_spec_, sums_spec_, field_spec_;
  detail::ExpOpts e1_, e2_, norm_exp_;
  std::string dump_format_ = "json", verify_radius_, index_ = "zero", profile_ = "exp";
  std::uint64_t samples_ = 1000000, samples_part_ = 100000, seed_ = 1;
  int order_ = 2;
  std::string in_, out_path_, space_ = "wp";
  int sob_k_ = 0;
  std::string sob_r_ = "2";
  std::string p0_ = "1", q0_ = "1", omega_ = "1", s0_ = "0", kappa_branch_ = "atomic";
  std::string window_ = "gamma", decay_rmax_ = "64";
  int deriv_ = -1, decay_radial_ = 48, decay_angular_ = 48;
  std::string delta_ = "1/4", band_, window_factor_ = "1";
  std::string field_band_ = "3", grid_l_ = "8", tol_ = "1e-10", target_ = "1e-3", scale_ = "1";
  int grid_n_ = 256, packets_ = 6, iters_ = 200;
  CLI::Option* seed_given_ = nullptr;
  CLI::Option* field_seed_ = nullptr;
  std::string sigma_ = "1", tau_ = "1", sum_s_ = "0", kappa0_, kappa1_, kappa2_;
  int quad_ = 16;
  bool plateau_ = false;
  int draws_ = 100, pairs_ = 200;
  std::size_t omega_samples_ = 10000;
  std::string kind_;
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Cli cli;
  return cli.run(argc, argv, out, err);
}

}  // namespace wavepacket::cli
