#include "zpc/cli.hpp"

#include <unistd.h>

#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "zpc/bounds.hpp"
#include "zpc/kernels.hpp"
#include "zpc/pair_stats.hpp"
#include "zpc/zero_engine.hpp"
#include "zpc/zero_multiset.hpp"

namespace zpc::cli {

namespace {

using nlohmann::json;

std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Options {
  std::string out_path;
  int workers = 0;
  std::string input;
  double T = 1000.0;
  std::string range_form = "full";
  double b = 1.0;
  std::string alpha = "0:1:0.05";
  std::string method = "windowed";
  std::string weight = "w";
  std::string mode = "real_w";
  double cutoff = 0.0;
  double quad_halfwidth = 15.0;
  double quad_step = 0.0;
  double identity_step = 1e-4;
  double tol = 1e-10;
  std::string c = "4/3";
  std::string h_list;
  std::string point;
  long count = 0;
  std::string mult_weights = "1,0,0";
  std::string beta_law = "uniform";
  std::string spacing = "gue";
  double shared = 0.0;
  bool mirror = false;
  std::uint64_t seed = 1;
  long multisets = 200;
};

/// One run's resolved configuration and output.
struct Run {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::string csv;
  std::optional<json> doc;
  int code = kOk;

  void set(const std::string& key, const std::string& value) { config.emplace_back(key, value); }
  void set(const std::string& key, double value) { set(key, num(value)); }
};

struct CheckRow {
  std::string name;
  double raw = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool holds = true;
};

std::string check_csv(const std::vector<CheckRow>& rows) {
  std::ostringstream ss;
  ss << "check,raw,bound,ratio,holds\n";
  for (const auto& r : rows) {
    ss << r.name << ',' << num(r.raw) << ',' << num(r.bound) << ',' << num(r.ratio) << ','
       << (r.holds ? "true" : "false") << '\n';
  }
  return ss.str();
}

int all_hold(const std::vector<CheckRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.holds; }) ? kOk
                                                                                           : kCertification;
}

double ratio_of(double raw, double bound) { return bound == 0.0 ? 0.0 : raw / bound; }

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size() || !std::isfinite(v)) {
      throw InvalidArgument(std::string(what) + ": '" + s + "' is not a comma-separated list of numbers");
    }
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument(std::string(what) + ": empty list");
  return out;
}

HeightRange make_range(const Options& o, Run& r) {
  r.set("t", o.T);
  r.set("range", o.range_form);
  return o.range_form == "dyadic" ? HeightRange(o.T, 2.0 * o.T) : HeightRange(0.0, o.T);
}

ZeroMultiset load_zeros(const Options& o, const HeightRange& need, int workers, Run& r) {
  if (!o.input.empty()) {
    std::ifstream in(o.input);
    if (!in) throw InvalidArgument("cannot open input file '" + o.input + "'");
    r.set("input", o.input);
    return read_zero_file(in);
  }
  r.set("input", "computed");
  engine::EngineOptions eo;
  eo.workers = workers;
  return ZeroMultiset::from_ordinates(engine::find_zeros(need, eo), Provenance::computed);
}

std::string multiset_csv(const ZeroMultiset& zs) {
  std::ostringstream ss;
  write_multiset_csv(ss, zs);
  return ss.str();
}

void cmd_zeros(const Options& o, int workers, Run& r) {
  const auto range = make_range(o, r);
  r.csv = multiset_csv(load_zeros(o, range, workers, r).restricted(range));
}

void cmd_ingest(const Options& o, int workers, Run& r) {
  if (o.input.empty()) throw InvalidArgument("ingest: --input is required");
  r.csv = multiset_csv(load_zeros(o, {}, workers, r));
}

void cmd_nt(const Options& o, int workers, Run& r) {
  r.set("t", o.T);
  engine::EngineOptions eo;
  eo.workers = workers;
  const auto rep = engine::count_zeros(o.T, eo);
  std::ostringstream ss;
  ss << "T,count,main_term,residual,turing_height,turing_upper\n"
     << num(o.T) << ',' << rep.count_signchange << ',' << num(rep.count_formula) << ',' << num(rep.residual)
     << ',' << num(rep.turing_height) << ',' << num(rep.turing_upper) << '\n';
  r.csv = ss.str();
}

void cmd_paircorr(const Options& o, int workers, Run& r) {
  PairSumSpec s;
  s.range = make_range(o, r);
  s.weight = o.weight == "W" ? Weight::W : Weight::w;
  s.exponent = o.weight == "W" ? Exponent::full : Exponent::unitary;
  s.alpha_grid = parse_alpha_grid(o.alpha);
  s.method = parse_method(o.method);
  s.window_cutoff = o.cutoff;
  s.quad_halfwidth = o.quad_halfwidth;
  s.quad_step = o.quad_step;
  s.workers = workers;
  r.set("weight", o.weight);
  r.set("alpha", o.alpha);
  r.set("method", o.method);
  r.set("cutoff", o.cutoff);
  r.set("quad_halfwidth", o.quad_halfwidth);
  r.set("quad_step", o.quad_step);
  const auto curve = pair_correlation(load_zeros(o, s.range, workers, r), s);
  std::ostringstream ss;
  ss << "# scale=" << num(curve.scale) << " zero_count=" << curve.zero_count
     << " window_cutoff=" << num(curve.window_cutoff) << " quad_step=" << num(curve.quad_step) << '\n';
  write_curve_csv(ss, curve);
  r.csv = ss.str();
}

void cmd_fejer(const Options& o, int workers, Run& r) {
  FejerSumSpec s;
  s.range = make_range(o, r);
  s.mode = parse_fejer_mode(o.mode);
  s.window_cutoff = o.cutoff;
  s.workers = workers;
  r.set("mode", o.mode);
  r.set("cutoff", o.cutoff);
  const auto f = fejer_pair_sum(load_zeros(o, s.range, workers, r), s);
  std::ostringstream ss;
  ss << "T,scale,mode,raw_re,raw_im,normalized,diagonal,trunc_bound,window_cutoff,zero_count\n"
     << num(f.T) << ',' << num(f.scale) << ',' << to_string(f.mode) << ',' << num(f.raw.real()) << ','
     << num(f.raw.imag()) << ',' << num(f.normalized) << ',' << num(f.diagonal) << ',' << num(f.trunc_bound)
     << ',' << num(f.window_cutoff) << ',' << f.zero_count << '\n';
  r.csv = ss.str();
}

std::vector<CheckRow> decomposition_rows(const DecompositionReport& d) {
  const double sel_bound = kSelbergPairConstant * d.error_sum;
  return {
      {"k_b", d.k_b.real(), d.k_b_trunc, d.k_b.real() / d.scale, true},
      {"real_sum", d.real_sum, d.real_trunc, d.real_sum / d.scale, true},
      {"difference", std::abs(d.difference), d.difference_bound(),
       ratio_of(std::abs(d.difference), d.difference_bound()), d.difference_holds},
      {"selberg_part", std::abs(d.selberg_part), sel_bound, ratio_of(std::abs(d.selberg_part), sel_bound),
       d.selberg_holds},
      {"w_part", std::abs(d.w_part), d.w_bound, ratio_of(std::abs(d.w_part), d.w_bound), d.w_holds},
      {"error_sum", d.error_sum, d.dyadic_tally, ratio_of(d.error_sum, d.dyadic_tally), d.tally_holds},
  };
}

void cmd_kb(const Options& o, int workers, Run& r) {
  const BoxSpec box(o.b, o.T);
  r.set("t", o.T);
  r.set("b", o.b);
  const auto d = fejer_error_term_decomposition(load_zeros(o, box.range(), workers, r), box, workers);
  const auto rows = decomposition_rows(d);
  std::ostringstream ss;
  ss << "# scale=" << num(d.scale) << " zero_count=" << d.zero_count << " error_ratio=" << num(d.error_ratio)
     << " tally_ratio=" << num(d.tally_ratio) << " selberg_pair_max=" << num(d.selberg_pair_max) << '\n'
     << check_csv(rows);
  r.csv = ss.str();
  r.code = all_hold(rows);
}

void cmd_lemma2(const Options& o, int workers, Run& r) {
  const auto range = make_range(o, r);
  const double T = range.reference_height();
  const double L = std::log(T);
  auto hs = o.h_list.empty() ? std::vector<double>{0.0, 1.0 / L, 2.0 / L, 1.0, 10.0}
                             : parse_list(o.h_list, "--h");
  std::sort(hs.begin(), hs.end());
  if (hs.front() < 0.0) throw InvalidArgument("--h: values must be >= 0");
  std::string joined;
  for (double h : hs) joined += (joined.empty() ? "" : ",") + num(h);
  r.set("h", joined);
  const auto zs = load_zeros(o, range, workers, r);
  std::ostringstream ss;
  ss << "h,count,normalized\n";
  long prev = -1;
  double sup = 0.0;
  for (double h : hs) {
    const long c = close_pair_count(zs, range, h);
    const double normalized = static_cast<double>(c) / ((1.0 + h * L) * T * L);
    sup = std::max(sup, normalized);
    if (c < prev) r.code = kCertification;
    prev = c;
    ss << num(h) << ',' << c << ',' << num(normalized) << '\n';
  }
  r.csv = "# sup_normalized=" + num(sup) + "\n" + ss.str();
}

void cmd_selberg(const Options& o, int, Run& r) {
  std::ostringstream ss;
  if (!o.point.empty()) {
    const auto p = parse_list(o.point, "--point");
    if (p.size() != 2) throw InvalidArgument("--point: expected x,y");
    if (p[1] < 0.0) throw InvalidArgument("--point: y must be >= 0");
    r.set("point", o.point);
    ss << "x,y,ratio\n" << num(p[0]) << ',' << num(p[1]) << ',' << num(selberg_ratio(p[0], p[1])) << '\n';
  } else {
    r.set("grid", "default");
    const auto rep = selberg_bound_check(default_selberg_grid());
    ss << "sup_ratio,argmax_x,argmax_y,points\n"
       << num(rep.sup_ratio) << ',' << num(rep.argmax.x) << ',' << num(rep.argmax.y) << ',' << rep.points << '\n';
  }
  r.csv = ss.str();
}

void cmd_identity(const Options& o, int, Run& r) {
  r.set("quad_step", o.identity_step);
  r.set("tol", o.tol);
  std::ostringstream ss;
  ss << "z_re,z_im,quadrature_re,quadrature_im,closed_re,closed_im,abs_diff,rel_diff\n";
  double worst = 0.0;
  for (const auto& z : default_identity_grid()) {
    const auto rep = fejer_integral_identity_check(z, o.identity_step);
    worst = std::max(worst, rep.abs_diff);
    ss << num(z.real()) << ',' << num(z.imag()) << ',' << num(rep.quadrature.real()) << ','
       << num(rep.quadrature.imag()) << ',' << num(rep.closed_form.real()) << ',' << num(rep.closed_form.imag())
       << ',' << num(rep.abs_diff) << ',' << num(rep.rel_diff) << '\n';
  }
  r.csv = ss.str();
  if (worst > o.tol) r.code = kCertification;
}

void cmd_extract_c(const Options& o, int workers, Run& r) {
  const auto range = make_range(o, r);
  const auto e = extract_C(load_zeros(o, range, workers, r), range);
  r.csv = "T,coincidence,scale,C_hat\n" + num(e.T) + ',' + std::to_string(e.coincidence) + ',' + num(e.scale) +
          ',' + num(e.C_hat) + '\n';
}

void cmd_proportions(const Options& o, int, Run& r) {
  const auto p = proportions_from_C(Rational::parse(o.c));
  r.set("c", p.C.str());
  const auto flag = [](bool f) { return f ? "true" : "false"; };
  r.csv = "quantity,value,clamped\nC," + p.C.str() + ",false\nsimple_and_critical," + p.p_simple_critical.str() +
          ',' + flag(p.clamped[0]) + "\naverage," + p.p_avg.str() + ',' + flag(p.clamped[1]) +
          "\nsimple_or_critical," + p.p_either.str() + ',' + flag(p.clamped[2]) + '\n';
}

void cmd_pipeline(const Options& o, int workers, Run& r) {
  const BoxSpec box(o.b, o.T);
  r.set("t", o.T);
  r.set("b", o.b);
  const auto rep = theorem1_pipeline(load_zeros(o, box.range(), workers, r), box, workers);
  r.doc = to_json(rep);
  if (!rep.certified()) r.code = kCertification;
}

SynthSpec synth_spec(const Options& o, Run& r) {
  SynthSpec s;
  s.box = BoxSpec(o.b, o.T);
  s.count = o.count > 0 ? o.count : std::lround(pair_scale(o.T));
  const auto w = parse_list(o.mult_weights, "--mult-weights");
  if (w.size() != 3) throw InvalidArgument("--mult-weights: expected three weights for multiplicity 1,2,3");
  std::copy(w.begin(), w.end(), s.mult_weights.begin());
  s.beta_law = parse_beta_law(o.beta_law);
  s.spacing = parse_spacing_law(o.spacing);
  s.shared_ordinate_prob = o.shared;
  s.mirror_pairs = o.mirror;
  s.seed = o.seed;
  r.set("t", o.T);
  r.set("b", o.b);
  r.set("count", std::to_string(s.count));
  r.set("mult_weights", o.mult_weights);
  r.set("beta_law", o.beta_law);
  r.set("spacing", o.spacing);
  r.set("shared", o.shared);
  r.set("mirror", o.mirror ? "true" : "false");
  r.set("seed", std::to_string(o.seed));
  return s;
}

void cmd_synth(const Options& o, int, Run& r) { r.csv = multiset_csv(synthesize(synth_spec(o, r))); }

void cmd_verify(const Options& o, int workers, Run& r) {
  const BoxSpec box(o.b, o.T);
  r.set("t", o.T);
  r.set("b", o.b);
  r.set("multisets", std::to_string(o.multisets));
  r.set("seed", std::to_string(o.seed));
  std::vector<CheckRow> rows;

  double worst = 0.0;
  for (const auto& z : default_identity_grid()) worst = std::max(worst, fejer_integral_identity_check(z).abs_diff);
  rows.push_back({"fejer_identity", worst, 1e-10, worst / 1e-10, worst <= 1e-10});

  const double hand = (std::sinh(1.0) * std::sinh(1.0) - 1.0) / (std::exp(2.0) / 2.0);
  const double at01 = selberg_ratio(0.0, 1.0);
  rows.push_back({"selberg_hand_value", std::abs(at01 - hand), 1e-12, std::abs(at01 - hand) / 1e-12,
                  std::abs(at01 - hand) <= 1e-12});
  const auto sel = selberg_bound_check(default_selberg_grid());
  const double sel_cap = kSelbergPairConstant / 2.0;
  rows.push_back({"selberg_sup", sel.sup_ratio, sel_cap, sel.sup_ratio / sel_cap, sel.sup_ratio <= sel_cap});

  std::mt19937_64 gen(o.seed);
  long failures = 0;
  for (long i = 0; i < o.multisets; ++i) {
    SynthSpec s;
    s.box = BoxSpec(std::uniform_real_distribution<double>(0.0, 1.0)(gen), 1000.0);
    s.count = std::uniform_int_distribution<long>(10, 500)(gen);
    s.mult_weights = {0.6, 0.25, 0.15};
    s.shared_ordinate_prob = 0.2;
    s.seed = gen();
    const auto zs = synthesize(s);
    FejerSumSpec f;
    f.range = s.box.range();
    f.mode = FejerMode::real_unweighted;
    f.workers = workers;
    if (static_cast<double>(coincidence_count(zs, f.range)) > fejer_pair_sum(zs, f).raw.real()) ++failures;
  }
  rows.push_back({"diagonal_inequality_failures", static_cast<double>(failures), 0.0, 0.0, failures == 0});

  const auto p = proportions_from_C(Rational(4, 3));
  const bool exact = p.p_simple_critical == Rational(2, 3) && p.p_avg == Rational(5, 6) &&
                     p.p_either == Rational(8, 9);
  rows.push_back({"proportions_at_4_3", exact ? 0.0 : 1.0, 0.0, 0.0, exact});

  const auto zs = load_zeros(o, {0.0, 2.0 * o.T}, workers, r);
  const HeightRange full(0.0, o.T);

  const auto l1 = lemma1_equivalence_check(zs, full, 0.05, workers);
  const double l1_bound = l1.quad_bound + l1.trunc_bound;
  rows.push_back({"alpha_integral_equivalence", l1.abs_diff, l1_bound, ratio_of(l1.abs_diff, l1_bound), l1.holds});

  const auto wr = weight_removal_check(zs, o.T, workers);
  rows.push_back({"weight_removal", wr.ratio_F0, 1.0, wr.ratio_F0, wr.ratio_F0 <= 1.0});

  const double L = std::log(o.T);
  long prev = -1;
  bool monotone = true;
  double sup = 0.0;
  for (double h : {0.0, 1.0 / L, 2.0 / L, 1.0, 10.0}) {
    const long c = close_pair_count(zs, full, h);
    monotone = monotone && c >= prev;
    prev = c;
    sup = std::max(sup, static_cast<double>(c) / ((1.0 + h * L) * o.T * L));
  }
  rows.push_back({"close_pairs_monotone", sup, 0.0, 0.0, monotone});

  const auto pipe = theorem1_pipeline(zs, box, workers);
  for (const auto& row : decomposition_rows(pipe.decomposition)) rows.push_back(row);
  for (const auto& n : pipe.chain) {
    if (n.name != "coincidence_count" && n.name != "C_hat") continue;
    rows.push_back({"chain_" + n.name, n.value, n.bound, ratio_of(n.value, n.bound), n.certified});
  }

  r.csv = check_csv(rows);
  r.code = all_hold(rows);
}

std::string config_line(const Run& r) {
  std::string line = "# zpc " + r.command;
  for (const auto& [k, v] : r.config) line += " " + k + "=" + v;
  return line + "\n";
}

json config_json(const Run& r) {
  json c = json::object();
  for (const auto& [k, v] : r.config) c[k] = v;
  return c;
}

std::string render(const Run& r) {
  if (r.doc) {
    json doc = *r.doc;
    doc["command"] = r.command;
    doc["config"] = config_json(r);
    return doc.dump(2) + "\n";
  }
  return config_line(r) + r.csv;
}

std::string error_line(const std::string& kind, const std::string& message) {
  return json{{"error", kind}, {"message", message}}.dump() + "\n";
}

using Handler = std::function<void(const Options&, int, Run&)>;

}  // namespace

void write_atomic(const std::string& path, const std::string& data) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    f << data;
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("rename to '" + path + "' failed: " + ec.message());
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"zpc: zeta zero pair statistics and Fejer kernel checks"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Options o;
  app.add_option("--out", o.out_path, "Write output atomically to this file (plus a .meta.json sidecar)");
  app.add_option("--workers", o.workers, "Worker threads; 0 reads ZPC_WORKERS, then hardware concurrency")
      ->check(CLI::NonNegativeNumber);

  std::map<std::string, Handler> handlers;
  const auto add = [&](const char* name, const char* help, Handler h) {
    handlers[name] = std::move(h);
    return app.add_subcommand(name, help);
  };
  std::map<std::string, double> default_height;
  const auto height = [&](CLI::App* sc, double def) {
    default_height[sc->get_name()] = def;
    sc->add_option("--t", o.T, "Height T (default " + num(def) + ")")->check(CLI::Range(10.0, 1e7));
  };
  const auto range = [&](CLI::App* sc) {
    sc->add_option("--range", o.range_form, "full = (0,T], dyadic = (T,2T]")
        ->capture_default_str()
        ->check(CLI::IsMember({"full", "dyadic"}));
  };
  const auto input = [&](CLI::App* sc) {
    sc->add_option("--input", o.input, "Zero file: beta,gamma,mult CSV or an ordinate table; default computes zeros");
  };
  const auto box_b = [&](CLI::App* sc) {
    sc->add_option("--b", o.b, "Box width parameter b")->capture_default_str()->check(CLI::NonNegativeNumber);
  };

  auto* zeros = add("zeros", "Compute zero ordinates", cmd_zeros);
  height(zeros, 1000.0);
  range(zeros);

  auto* ingest = add("ingest", "Normalize a zero table to beta,gamma,mult CSV", cmd_ingest);
  input(ingest);

  auto* nt = add("nt", "Certified zero count N(T) and main-term residual", cmd_nt);
  height(nt, 100.0);

  auto* pc = add("paircorr", "Pair-correlation curve F(alpha, T)", cmd_paircorr);
  height(pc, 1000.0);
  range(pc);
  input(pc);
  pc->add_option("--alpha", o.alpha, "lo:hi:step or a single alpha")->capture_default_str();
  pc->add_option("--method", o.method, "windowed or spectral")
      ->capture_default_str()
      ->check(CLI::IsMember({"windowed", "spectral"}));
  pc->add_option("--weight", o.weight, "w (ordinate differences) or W (full complex differences)")
      ->capture_default_str()
      ->check(CLI::IsMember({"w", "W"}));
  pc->add_option("--cutoff", o.cutoff, "Window cutoff U; 0 picks the default")->check(CLI::NonNegativeNumber);
  pc->add_option("--quad-halfwidth", o.quad_halfwidth, "Spectral xi half-width")->capture_default_str();
  pc->add_option("--quad-step", o.quad_step, "Spectral xi step; 0 picks the default")
      ->check(CLI::NonNegativeNumber);

  auto* fj = add("fejer", "Fejer pair sum", cmd_fejer);
  height(fj, 1000.0);
  range(fj);
  input(fj);
  fj->add_option("--mode", o.mode, "complex_W, real_w or real_unweighted")
      ->capture_default_str()
      ->check(CLI::IsMember({"complex_W", "real_w", "real_unweighted"}));
  fj->add_option("--cutoff", o.cutoff, "Window cutoff; 0 picks the default")->check(CLI::NonNegativeNumber);

  auto* kb = add("kb", "K_b(T) and its error-term decomposition over a box", cmd_kb);
  height(kb, 1000.0);
  box_b(kb);
  input(kb);

  auto* l2 = add("lemma2", "Close pair counts against (1 + h log T) T log T", cmd_lemma2);
  height(l2, 1000.0);
  range(l2);
  input(l2);
  l2->set_help_flag("--help", "Print this help message and exit");
  l2->add_option("--h", o.h_list, "Comma-separated h values; default 0,1/log T,2/log T,1,10");

  auto* sb = add("selberg", "Selberg ratio sup over the default grid, or at one point", cmd_selberg);
  sb->add_option("--point", o.point, "x,y");

  auto* id = add("identity", "Fejer integral identity on the 50-point complex grid", cmd_identity);
  id->add_option("--quad-step", o.identity_step, "Gauss-Legendre panel width")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  id->add_option("--tol", o.tol, "Absolute tolerance")->capture_default_str()->check(CLI::PositiveNumber);

  auto* ec = add("extract-c", "C_hat = coincidences / ((T/2pi) log T)", cmd_extract_c);
  height(ec, 1000.0);
  range(ec);
  input(ec);

  auto* pr = add("proportions", "Exact proportion bounds for a constant C >= 1", cmd_proportions);
  pr->add_option("--c", o.c, "C as p/q, an integer or a decimal")->capture_default_str();

  auto* pl = add("pipeline", "Certified chain from coincidences to proportions", cmd_pipeline);
  height(pl, 1000.0);
  box_b(pl);
  input(pl);

  auto* sy = add("synth", "Seeded synthetic multiset inside a box", cmd_synth);
  height(sy, 1000.0);
  box_b(sy);
  sy->add_option("--count", o.count, "Zeros; 0 picks (T/2pi) log T")->check(CLI::NonNegativeNumber);
  sy->add_option("--mult-weights", o.mult_weights, "Weights of multiplicity 1,2,3")->capture_default_str();
  sy->add_option("--beta-law", o.beta_law, "critical, uniform or edge")
      ->capture_default_str()
      ->check(CLI::IsMember({"critical", "uniform", "edge"}));
  sy->add_option("--spacing", o.spacing, "gue, poisson or lattice")
      ->capture_default_str()
      ->check(CLI::IsMember({"gue", "poisson", "lattice"}));
  sy->add_option("--shared", o.shared, "Probability of sharing the previous ordinate")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sy->add_flag("--mirror", o.mirror, "Shared-ordinate partners take beta' = 1 - beta");
  sy->add_option("--seed", o.seed, "Generator seed")->capture_default_str();

  auto* vf = add("verify", "Run every asserted inequality; exit 0 only if all hold", cmd_verify);
  height(vf, 1000.0);
  box_b(vf);
  input(vf);
  vf->add_option("--multisets", o.multisets, "Synthetic multisets for the diagonal inequality")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  vf->add_option("--seed", o.seed, "Seed for the synthetic multisets")->capture_default_str();

  o.T = 0.0;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << error_line("usage", e.what());
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (o.T == 0.0 && default_height.contains(name)) o.T = default_height.at(name);
  const int workers = resolve_workers(o.workers);

  Run r;
  r.command = name;
  try {
    handlers.at(name)(o, workers, r);
  } catch (const BoxViolation& e) {
    json offenders = json::array();
    for (const auto& z : e.offenders()) offenders.push_back({{"beta", z.beta}, {"gamma", z.gamma}, {"mult", z.mult}});
    err << json{{"error", "box_violation"}, {"message", e.what()}, {"offenders", offenders}}.dump() << "\n";
    return kCertification;
  } catch (const InvalidArgument& e) {
    err << error_line("usage", e.what()) << sub->help();
    return kUsage;
  } catch (const std::exception& e) {
    err << error_line("computation", e.what());
    return kComputation;
  }

  const std::string body = render(r);
  try {
    if (o.out_path.empty()) {
      out << body;
    } else {
      write_atomic(o.out_path, body);
      json meta = {{"command", name},
                   {"config", config_json(r)},
                   {"workers", workers},
                   {"timestamp", utc_timestamp()},
                   {"output", o.out_path},
                   {"exit_code", r.code}};
      write_atomic(o.out_path + ".meta.json", meta.dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    err << error_line("computation", e.what());
    return kComputation;
  }
  if (r.code == kCertification) err << error_line("certification", "an asserted inequality does not hold");
  return r.code;
}

}  // namespace zpc::cli
