#include "circlefact/cli.hpp"

#include "circlefact/calculus.hpp"
#include "circlefact/core_maps.hpp"
#include "circlefact/finite_words.hpp"
#include "circlefact/invertibility.hpp"
#include "circlefact/opuc.hpp"
#include "circlefact/stochastic.hpp"
#include "circlefact/welding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace circlefact::cli {

using nlohmann::json;

namespace {

const std::map<std::string, std::set<std::string>>& command_keys()
{
    static const std::set<std::string> base{"command", "seed", "tol", "output"};
    auto with = [](std::set<std::string> extra) {
        extra.insert(base.begin(), base.end());
        return extra;
    };
    static const std::map<std::string, std::set<std::string>> keys{
        {"eval", with({"model", "grid", "truncation"})},
        {"derive", with({"model", "grid", "truncation", "order"})},
        {"probe", with({"model", "truncation", "theta", "x0"})},
        {"mc", with({"model", "truncation", "trials", "theta", "x0", "mode", "threshold"})},
        {"weld", with({"model", "grid", "truncation", "method", "m_start", "m_max"})},
        {"opuc", with({"model", "grid", "truncation", "alphas", "coefficients"})},
        {"word", with({"grid", "word"})},
        {"cocycle", with({"grid", "chains"})},
    };
    return keys;
}

const std::set<std::string>& all_keys()
{
    static const std::set<std::string> keys = [] {
        std::set<std::string> s;
        for (const auto& [cmd, ks] : command_keys())
            s.insert(ks.begin(), ks.end());
        return s;
    }();
    return keys;
}

std::vector<std::size_t> default_truncation(const std::string& command, const std::string& mode)
{
    if (command == "probe")
        return {100000};
    if (command == "mc")
        return mode == "decay" ? std::vector<std::size_t>{100, 1000, 10000}
                               : std::vector<std::size_t>{10000};
    if (command == "weld" || command == "opuc")
        return {16};
    return {64};
}

// Error reporting with line context taken from the source text.
class Reporter {
public:
    Reporter(std::string source, std::string text) : source_(std::move(source)), text_(std::move(text)) {}

    [[noreturn]] void fail(const std::string& key, const std::string& what) const
    {
        std::ostringstream os;
        os << source_;
        const std::size_t line = locate(key);
        if (line)
            os << ":" << line;
        os << ": field '" << key << "': " << what;
        if (line)
            os << "\n  " << line << " | " << line_text(line);
        throw ConfigError(os.str());
    }

    [[noreturn]] void fail_at_offset(std::size_t offset, const std::string& what) const
    {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream os;
        os << source_ << ":" << line << ":" << col << ": " << what << "\n  " << line << " | "
           << line_text(line);
        throw ConfigError(os.str());
    }

private:
    std::size_t locate(const std::string& key) const
    {
        if (text_.empty())
            return 0;
        const std::string leaf = key.substr(key.find_last_of('.') + 1);
        const std::string needle = "\"" + leaf.substr(0, leaf.find('[')) + "\"";
        const std::size_t pos = text_.find(needle);
        if (pos == std::string::npos)
            return 0;
        return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    }

    std::string line_text(std::size_t line) const
    {
        std::istringstream is(text_);
        std::string s;
        for (std::size_t i = 0; i < line && std::getline(is, s); ++i) {}
        return s;
    }

    std::string source_;
    std::string text_;
};

double get_number(const Reporter& rep, const std::string& key, const json& v)
{
    if (!v.is_number())
        rep.fail(key, "expected a number");
    return v.get<double>();
}

std::uint64_t get_unsigned(const Reporter& rep, const std::string& key, const json& v, bool positive)
{
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        rep.fail(key, "expected a nonnegative integer");
    const std::uint64_t x = v.get<std::uint64_t>();
    if (positive && x == 0)
        rep.fail(key, "expected a positive integer");
    return x;
}

std::string get_string(const Reporter& rep, const std::string& key, const json& v)
{
    if (!v.is_string())
        rep.fail(key, "expected a string");
    return v.get<std::string>();
}

cplx get_complex(const Reporter& rep, const std::string& key, const json& v)
{
    if (v.is_number())
        return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    rep.fail(key, "expected a number or a [re, im] pair");
}

std::vector<cplx> get_complex_list(const Reporter& rep, const std::string& key, const json& v)
{
    if (!v.is_array())
        rep.fail(key, "expected an array");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(get_complex(rep, key + "[" + std::to_string(i) + "]", v[i]));
    return out;
}

void require_object(const Reporter& rep, const std::string& key, const json& v,
                    const std::set<std::string>& allowed)
{
    if (!v.is_object())
        rep.fail(key, "expected an object");
    for (const auto& [k, _] : v.items())
        if (!allowed.count(k))
            rep.fail(key + "." + k, "unknown key '" + k + "'");
}

ModelSpec parse_model(const Reporter& rep, const json& v)
{
    require_object(rep, "model", v, {"kind", "terms", "ordering", "rule", "beta_slope", "beta_offset"});
    ModelSpec m;
    if (!v.contains("kind"))
        rep.fail("model.kind", "is required (terms | rule | random_phases | beta)");
    m.kind = get_string(rep, "model.kind", v["kind"]);
    std::set<std::string> used{"kind"};
    if (m.kind == "terms") {
        used.insert({"terms", "ordering"});
        if (!v.contains("terms"))
            rep.fail("model.terms", "is required for kind 'terms'");
        m.terms = get_complex_list(rep, "model.terms", v["terms"]);
        for (std::size_t i = 0; i < m.terms.size(); ++i)
            if (!(std::abs(m.terms[i]) < 1.0))
                rep.fail("model.terms", "entry " + std::to_string(i) + " must lie in the open unit disk");
        if (v.contains("ordering")) {
            const json& o = v["ordering"];
            if (!o.is_array())
                rep.fail("model.ordering", "expected an array");
            for (const json& x : o)
                m.ordering.push_back(get_unsigned(rep, "model.ordering", x, true));
            std::vector<std::size_t> sorted = m.ordering;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                rep.fail("model.ordering", "indices must be distinct");
        }
    } else if (m.kind == "rule" || m.kind == "random_phases") {
        used.insert("rule");
        if (!v.contains("rule"))
            rep.fail("model.rule", "is required for kind '" + m.kind + "'");
        m.rule = get_string(rep, "model.rule", v["rule"]);
        try {
            (void)MagnitudeRule::parse(m.rule);
        } catch (const PreconditionError& e) {
            rep.fail("model.rule", e.what());
        }
    } else if (m.kind == "beta") {
        used.insert({"beta_slope", "beta_offset"});
        if (v.contains("beta_slope"))
            m.beta_slope = get_number(rep, "model.beta_slope", v["beta_slope"]);
        if (v.contains("beta_offset"))
            m.beta_offset = get_number(rep, "model.beta_offset", v["beta_offset"]);
        if (!(m.beta_slope + m.beta_offset > 0.0) || m.beta_slope < 0.0)
            rep.fail("model.beta_slope", "a_n = slope * n + offset must be positive for n >= 1");
    } else {
        rep.fail("model.kind", "unknown kind '" + m.kind + "' (terms | rule | random_phases | beta)");
    }
    for (const auto& [k, _] : v.items())
        if (!used.count(k))
            rep.fail("model." + k, "key '" + k + "' is not used by kind '" + m.kind + "'");
    return m;
}

ChainSpec parse_chain(const Reporter& rep, const std::string& key, const json& v)
{
    if (!v.is_array())
        rep.fail(key, "expected an array of factors");
    ChainSpec out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string k = key + "[" + std::to_string(i) + "]";
        const json& f = v[i];
        require_object(rep, k, f, {"rot", "n", "w"});
        if (f.contains("rot")) {
            if (f.contains("n") || f.contains("w"))
                rep.fail(k, "a factor is either {\"rot\": z} or {\"n\": n, \"w\": w}");
            const cplx lam = get_complex(rep, k + ".rot", f["rot"]);
            if (std::abs(std::abs(lam) - 1.0) > 1e-12)
                rep.fail(k + ".rot", "rotation must be unimodular");
            out.push_back({0, lam});
        } else {
            if (!f.contains("n") || !f.contains("w"))
                rep.fail(k, "a factor is either {\"rot\": z} or {\"n\": n, \"w\": w}");
            const auto n = get_unsigned(rep, k + ".n", f["n"], true);
            const cplx w = get_complex(rep, k + ".w", f["w"]);
            if (!(std::abs(w) < 1.0))
                rep.fail(k + ".w", "must lie in the open unit disk");
            out.push_back({static_cast<unsigned>(n), w});
        }
    }
    return out;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json complex_list_json(const std::vector<cplx>& v)
{
    json a = json::array();
    for (const cplx& z : v)
        a.push_back(complex_json(z));
    return a;
}

json chain_json(const ChainSpec& c)
{
    json a = json::array();
    for (const WordItem& f : c) {
        if (f.n == 0)
            a.push_back({{"rot", complex_json(f.value)}});
        else
            a.push_back({{"n", f.n}, {"w", complex_json(f.value)}});
    }
    return a;
}

FiniteTypeWord to_word(const ChainSpec& c)
{
    std::vector<WordElement> els;
    for (const WordItem& f : c)
        els.push_back(f.n == 0 ? WordElement::rot(f.value) : WordElement::phi(f.n, f.value));
    return word_push_rotation_left(els);
}

RootCoordinateSequence make_coords(const ModelSpec& m)
{
    if (m.kind == "terms")
        return RootCoordinateSequence(m.terms, std::nullopt, m.ordering);
    if (m.kind == "rule")
        return RootCoordinateSequence::from_rule(MagnitudeRule::parse(m.rule));
    throw PreconditionError("model kind '" + m.kind + "' is random; use the mc command");
}

RandomModel make_random_model(const ModelSpec& m, std::uint64_t seed)
{
    RandomModel r;
    r.seed = seed;
    if (m.kind == "random_phases") {
        r.kind = RandomModel::Kind::magnitude;
        r.magnitude = MagnitudeRule::parse(m.rule);
    } else if (m.kind == "beta") {
        r.kind = RandomModel::Kind::beta;
        r.beta = {m.beta_slope, m.beta_offset};
    } else {
        throw PreconditionError("mc needs a random model (random_phases | beta)");
    }
    return r;
}

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header)
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            os_ << (i ? "," : "") << header[i];
        os_ << "\n";
    }

    template <class... Ts>
    void row(const Ts&... xs)
    {
        bool first = true;
        (emit(xs, first), ...);
        os_ << "\n";
    }

    void row_vec(const std::vector<double>& xs)
    {
        for (std::size_t i = 0; i < xs.size(); ++i)
            os_ << (i ? "," : "") << format_double(xs[i]);
        os_ << "\n";
    }

    std::string str() const { return os_.str(); }

private:
    void sep(bool& first)
    {
        if (!first)
            os_ << ",";
        first = false;
    }
    void emit(double x, bool& first) { sep(first); os_ << format_double(x); }
    void emit(cplx z, bool& first) { emit(z.real(), first); emit(z.imag(), first); }
    void emit(std::size_t x, bool& first) { sep(first); os_ << x; }
    void emit(const std::string& s, bool& first) { sep(first); os_ << s; }

    std::ostringstream os_;
};

json nan_safe(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ------------------------------------------------------------------ commands

RunOutput run_eval(const ExperimentConfig& cfg)
{
    const RootCoordinateSequence coords = make_coords(*cfg.model);
    const std::vector<double> th = uniform_grid(cfg.grid);
    std::vector<std::string> header{"theta"};
    std::vector<CircleLift> lifts;
    json tails = json::array(), monotone = json::array();
    for (std::size_t N : cfg.truncation) {
        header.push_back("sigma_" + std::to_string(N));
        lifts.push_back(sigma_lift_eval(coords, N, th));
        tails.push_back(nan_safe(lifts.back().tail_bound));
        monotone.push_back(lifts.back().is_monotone());
    }
    Csv csv(header);
    for (std::size_t i = 0; i < th.size(); ++i) {
        std::vector<double> r{th[i]};
        for (const CircleLift& l : lifts)
            r.push_back(l.values[i]);
        csv.row_vec(r);
    }
    double periodicity = 0.0;
    for (const CircleLift& l : lifts)
        periodicity = std::max(periodicity, std::abs(sigma_at(coords, l.truncation, th[0] + kTwoPi) -
                                                     l.values[0] - kTwoPi));
    RunOutput out{csv.str(), json::object()};
    out.summary["verdicts"] = {{"monotone", monotone}};
    out.summary["residuals"] = {{"lift_periodicity", periodicity}};
    out.summary["results"] = {{"tail_bound", tails}};
    return out;
}

RunOutput run_derive(const ExperimentConfig& cfg)
{
    const RootCoordinateSequence coords = make_coords(*cfg.model);
    const std::vector<double> th = uniform_grid(cfg.grid);
    const std::size_t N = cfg.truncation.back();
    std::vector<std::string> header{"theta"};
    for (unsigned s = 0; s <= cfg.order; ++s)
        header.push_back(s == 0 ? "sigma" : "d" + std::to_string(s));
    Csv csv(header);
    std::vector<double> d1(th.size());
    for (std::size_t i = 0; i < th.size(); ++i) {
        const DerivativeStack st = higher_derivative(coords, N, cfg.order, th[i]);
        std::vector<double> r{th[i]};
        r.insert(r.end(), st.derivs.begin(), st.derivs.end());
        csv.row_vec(r);
        d1[i] = st.derivs.size() > 1 ? st.derivs[1] : 1.0;
    }
    const double mean_err = std::abs(periodic_mean(d1) - 1.0);
    RunOutput out{csv.str(), json::object()};
    out.summary["verdicts"] = {{"mean_derivative_within_tol", mean_err <= cfg.tol}};
    out.summary["residuals"] = {{"mean_derivative", mean_err}};
    out.summary["results"] = {{"truncation", N}, {"order", cfg.order}};
    return out;
}

RunOutput run_probe(const ExperimentConfig& cfg)
{
    const RootCoordinateSequence coords = make_coords(*cfg.model);
    const std::size_t N = cfg.truncation.back();
    const Invertibility verdict = classify_rule(coords.rule());
    const CollapseTrace tr = collapse_probe(coords, cfg.theta, cfg.x0, N, cfg.tol, true);
    Csv csv({"k", "D", "p"});
    std::size_t next = 0;
    for (std::size_t k = 0; k <= N; ++k) {
        if (k == next || k == N) {
            csv.row(k, tr.D[k], tr.p[k]);
            next = std::max(next + 1, static_cast<std::size_t>(static_cast<double>(next) * 1.25));
        }
    }
    RunOutput out{csv.str(), json::object()};
    out.summary["verdict"] = to_string(verdict);
    out.summary["verdicts"] = {{"invertibility", to_string(verdict)},
                               {"collapse", to_string(tr.verdict)}};
    out.summary["residuals"] = {{"final_D_over_x0", tr.D.back() / cfg.x0}};
    out.summary["results"] = {{"final_D", tr.D.back()},
                              {"final_p", tr.p.back()},
                              {"b_estimate", tr.b_estimate}};
    return out;
}

json proportion_json(const Proportion& p)
{
    return {{"successes", p.successes}, {"trials", p.trials}, {"fraction", p.fraction},
            {"wilson_lower", p.lower}, {"wilson_upper", p.upper}};
}

RunOutput run_mc(const ExperimentConfig& cfg, unsigned threads)
{
    const RandomModel model = make_random_model(*cfg.model, cfg.seed);
    RunOutput out{"", json::object()};
    if (cfg.mode == "collapse") {
        const std::size_t N = cfg.truncation.back();
        const McInvertibility mc = mc_invertibility(model, cfg.theta, cfg.x0, N, cfg.trials, cfg.tol, threads);
        Csv csv({"trial", "verdict", "log10_ratio"});
        for (std::size_t t = 0; t < mc.verdicts.size(); ++t)
            csv.row(t, to_string(mc.verdicts[t]), mc.log10_ratio[t]);
        out.csv = csv.str();
        out.summary["verdicts"] = {{"collapsed", proportion_json(mc.collapsed)}};
        out.summary["residuals"] = json::object();
        out.summary["results"] = {{"truncation", N}};
    } else {
        const std::vector<DecayRow> rows =
            mc_derivative_decay(model, cfg.theta, cfg.truncation, cfg.trials, cfg.threshold, false, threads);
        Csv csv({"N", "mean", "variance", "median", "expected_mean", "expected_variance", "s",
                 "envelope", "fraction_small"});
        json inside = json::array();
        double worst = 0.0;
        for (const DecayRow& r : rows) {
            csv.row(r.N, r.mean, r.variance, r.median, r.expected_mean, r.expected_variance, r.s,
                    r.envelope, r.fraction_small);
            const double dev = std::abs(r.median + r.s);
            worst = std::max(worst, dev / r.envelope);
            inside.push_back(dev <= r.envelope);
        }
        out.csv = csv.str();
        out.summary["verdicts"] = {{"median_within_envelope", inside}};
        out.summary["residuals"] = {{"max_median_deviation_over_envelope", nan_safe(worst)}};
        out.summary["results"] = json::object();
    }
    return out;
}

RunOutput run_weld(const ExperimentConfig& cfg)
{
    const RootCoordinateSequence coords = make_coords(*cfg.model);
    const CompositionChain chain = chain_from(coords, cfg.truncation.back());
    WeldingTriple t;
    json results = json::object();
    if (cfg.method == "closed_form") {
        if (chain.steps.size() != 1)
            throw PreconditionError("closed_form needs exactly one nonzero coordinate");
        t = weld_phi_n(chain.steps[0].n, chain.steps[0].w, std::polar(1.0, chain.rotation));
    } else {
        const WeldSolution s = weld_solve(lift_of(chain), cfg.tol, cfg.m_start, cfg.m_max);
        t = s.triple;
        results["M"] = s.M;
        results["rcond"] = s.rcond;
        results["drift"] = s.drift;
        results["drift_history"] = s.drift_history;
        results["positive_leak"] = s.positive_leak;
        results["converged"] = s.converged;
        if (!s.converged)
            throw NumericalError("power operator truncation did not stabilise by M = " +
                                 std::to_string(cfg.m_max));
    }
    const double residual = welding_residual(t, chain, cfg.grid);
    const std::size_t K = std::max(t.u_coeffs.size(), t.L_coeffs.size());
    Csv csv({"k", "u_re", "u_im", "L_re", "L_im"});
    for (std::size_t k = 0; k < K; ++k) {
        const cplx u = k == 0 ? cplx(1.0) : (k - 1 < t.u_coeffs.size() ? t.u_coeffs[k - 1] : cplx{});
        const cplx L = k < t.L_coeffs.size() ? t.L_coeffs[k] : cplx{};
        csv.row(k, u, L);
    }
    results["a"] = t.a;
    results["m"] = complex_json(t.m);
    RunOutput out{csv.str(), json::object()};
    out.summary["verdicts"] = {{"method", cfg.method}};
    out.summary["residuals"] = {{"welding", residual}};
    out.summary["results"] = results;
    return out;
}

RunOutput run_opuc(const ExperimentConfig& cfg)
{
    const std::vector<double> th = uniform_grid(cfg.grid);
    std::vector<double> rho;
    json residuals = json::object();
    if (!cfg.alphas.empty()) {
        rho = verblunsky_to_measure(cfg.alphas, th);
        const IdentityCheck sz = szego_identity_check(cfg.alphas, cfg.grid);
        const IdentityCheck ib = ibragimov_identity_check(cfg.alphas, cfg.grid);
        residuals["szego"] = sz.residual;
        residuals["ibragimov"] = ib.residual;
    } else {
        const CompositionChain chain = chain_from(make_coords(*cfg.model), cfg.truncation.back());
        rho.resize(th.size());
        for (std::size_t i = 0; i < th.size(); ++i)
            rho[i] = chain.jet(th[i]).d1;
    }
    const MomentSequence mom = moments_from_density(rho, cfg.coefficients + 1);
    residuals["normalisation"] = std::abs(mom.c[0] - 1.0);
    const VerblunskySequence v = measure_to_verblunsky(mom, cfg.coefficients);
    if (!cfg.alphas.empty()) {
        double rt = 0.0;
        for (std::size_t n = 0; n < v.alphas.size(); ++n)
            rt = std::max(rt, std::abs(v.alphas[n] - (n < cfg.alphas.size() ? cfg.alphas[n] : cplx{})));
        residuals["round_trip"] = rt;
    }
    const std::size_t Nt = std::min<std::size_t>(cfg.coefficients, 4);
    residuals["toeplitz"] = toeplitz_det(mom, Nt).residual;
    Csv csv({"theta", "density"});
    for (std::size_t i = 0; i < th.size(); ++i)
        csv.row(th[i], rho[i]);
    RunOutput out{csv.str(), json::object()};
    bool within = true;
    for (const auto& [k, r] : residuals.items())
        within = within && r.get<double>() <= cfg.tol;
    out.summary["verdicts"] = {{"residuals_within_tol", within}};
    out.summary["residuals"] = residuals;
    out.summary["results"] = {{"alphas", complex_list_json(v.alphas)}, {"convention", v.convention}};
    return out;
}

RunOutput run_word(const ExperimentConfig& cfg)
{
    const FiniteTypeWord w = to_word(cfg.word);
    const FiniteTypeWord r = word_reduce(w);
    const std::vector<double> th = uniform_grid(cfg.grid);
    const CircleLift a = word_eval(w, th), b = word_eval(r, th);
    double res = 0.0;
    Csv csv({"theta", "word", "reduced"});
    for (std::size_t i = 0; i < th.size(); ++i) {
        res = std::max(res, std::abs(std::remainder(a.values[i] - b.values[i], kTwoPi)));
        csv.row(th[i], a.values[i], b.values[i]);
    }
    json factors = json::array();
    std::vector<unsigned> idx;
    for (const WordFactor& f : r.factors) {
        factors.push_back({{"n", f.n}, {"w", complex_json(f.w)}});
        idx.push_back(f.n);
    }
    RunOutput out{csv.str(), json::object()};
    out.summary["verdicts"] = {{"canonical", r.is_canonical()}, {"reduction_within_tol", res <= cfg.tol}};
    out.summary["residuals"] = {{"reduction", res}};
    out.summary["results"] = {{"rotation", complex_json(r.rotation)},
                              {"factors", factors},
                              {"degree", word_degree(r)}};
    return out;
}

RunOutput run_cocycle(const ExperimentConfig& cfg)
{
    std::vector<CompositionChain> ch;
    for (const ChainSpec& c : cfg.chains)
        ch.push_back(to_word(c).chain());
    Csv csv({"first", "second", "value"});
    json residuals = json::object();
    const double ab = bott_cocycle(ch[0], ch[1], cfg.grid);
    csv.row(std::size_t{0}, std::size_t{1}, ab);
    bool ok = true;
    if (ch.size() == 3) {
        const double bc = bott_cocycle(ch[1], ch[2], cfg.grid);
        const double ab_c = bott_cocycle(ch[1].then(ch[0]), ch[2], cfg.grid);
        const double a_bc = bott_cocycle(ch[0], ch[2].then(ch[1]), cfg.grid);
        csv.row(std::size_t{1}, std::size_t{2}, bc);
        const double r = std::abs(ab_c + ab - a_bc - bc);
        residuals["cocycle_identity"] = r;
        ok = r <= cfg.tol;
    }
    RunOutput out{csv.str(), json::object()};
    out.summary["verdicts"] = {{"cocycle_identity_within_tol", ok}};
    out.summary["residuals"] = residuals;
    out.summary["results"] = {{"chains", cfg.chains.size()}};
    return out;
}

} // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"eval", "derive", "probe", "mc", "weld", "opuc", "word", "cocycle"};
    return names;
}

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

unsigned threads_from_env()
{
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("CIRCLEFACT_THREADS");
    if (!env || !*env)
        return hw;
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0)
        throw PreconditionError("CIRCLEFACT_THREADS must be a positive integer");
    return static_cast<unsigned>(std::min<unsigned long>(v, 1024));
}

ExperimentConfig parse_config(const json& j, const std::string& source, const std::string& text)
{
    const Reporter rep(source, text);
    if (!j.is_object())
        rep.fail("command", "config must be a JSON object");
    for (const auto& [k, _] : j.items())
        if (!all_keys().count(k))
            rep.fail(k, "unknown key '" + k + "'");
    if (!j.contains("command"))
        rep.fail("command", "is required");
    ExperimentConfig c;
    c.command = get_string(rep, "command", j["command"]);
    const auto it = command_keys().find(c.command);
    if (it == command_keys().end())
        rep.fail("command", "unknown command '" + c.command + "'");
    for (const auto& [k, _] : j.items())
        if (!it->second.count(k))
            rep.fail(k, "key '" + k + "' is not used by command '" + c.command + "'");

    if (j.contains("seed"))
        c.seed = get_unsigned(rep, "seed", j["seed"], false);
    if (j.contains("tol")) {
        c.tol = get_number(rep, "tol", j["tol"]);
        if (!(c.tol > 0.0))
            rep.fail("tol", "must be positive");
    }
    if (j.contains("output"))
        c.output = get_string(rep, "output", j["output"]);
    if (j.contains("grid")) {
        c.grid = get_unsigned(rep, "grid", j["grid"], true);
        if (c.grid < 8)
            rep.fail("grid", "must be at least 8");
    }
    if (j.contains("trials"))
        c.trials = get_unsigned(rep, "trials", j["trials"], true);
    if (j.contains("theta"))
        c.theta = get_number(rep, "theta", j["theta"]);
    if (j.contains("x0")) {
        c.x0 = get_number(rep, "x0", j["x0"]);
        if (!(c.x0 > 0.0))
            rep.fail("x0", "must be positive");
    }
    if (j.contains("order")) {
        c.order = static_cast<unsigned>(get_unsigned(rep, "order", j["order"], true));
        if (c.order > 12)
            rep.fail("order", "must be at most 12");
    }
    if (j.contains("mode")) {
        c.mode = get_string(rep, "mode", j["mode"]);
        if (c.mode != "collapse" && c.mode != "decay")
            rep.fail("mode", "expected 'collapse' or 'decay'");
    }
    if (j.contains("threshold")) {
        c.threshold = get_number(rep, "threshold", j["threshold"]);
        if (!(c.threshold > 0.0))
            rep.fail("threshold", "must be positive");
    }
    if (j.contains("method")) {
        c.method = get_string(rep, "method", j["method"]);
        if (c.method != "solve" && c.method != "closed_form")
            rep.fail("method", "expected 'solve' or 'closed_form'");
    }
    if (j.contains("m_start"))
        c.m_start = get_unsigned(rep, "m_start", j["m_start"], true);
    if (j.contains("m_max"))
        c.m_max = get_unsigned(rep, "m_max", j["m_max"], true);
    if (c.m_max < c.m_start)
        rep.fail("m_max", "must be at least m_start");
    if (j.contains("alphas")) {
        c.alphas = get_complex_list(rep, "alphas", j["alphas"]);
        for (const cplx& a : c.alphas)
            if (!(std::abs(a) < 1.0))
                rep.fail("alphas", "coefficients must lie in the open unit disk");
    }
    if (j.contains("coefficients"))
        c.coefficients = get_unsigned(rep, "coefficients", j["coefficients"], true);
    if (c.command == "opuc" && c.grid < 2 * c.coefficients + 3)
        rep.fail("grid", "too coarse for the requested number of coefficients");
    if (j.contains("word"))
        c.word = parse_chain(rep, "word", j["word"]);
    if (j.contains("chains")) {
        const json& ch = j["chains"];
        if (!ch.is_array() || ch.size() < 2 || ch.size() > 3)
            rep.fail("chains", "expected an array of two or three chains");
        for (std::size_t i = 0; i < ch.size(); ++i)
            c.chains.push_back(parse_chain(rep, "chains[" + std::to_string(i) + "]", ch[i]));
    }
    if (j.contains("model"))
        c.model = parse_model(rep, j["model"]);
    if (j.contains("truncation")) {
        const json& t = j["truncation"];
        if (!t.is_array() || t.empty())
            rep.fail("truncation", "expected a nonempty array of positive integers");
        for (const json& x : t)
            c.truncation.push_back(get_unsigned(rep, "truncation", x, true));
        if (!std::is_sorted(c.truncation.begin(), c.truncation.end()) ||
            std::adjacent_find(c.truncation.begin(), c.truncation.end()) != c.truncation.end())
            rep.fail("truncation", "must be strictly increasing");
    } else if (it->second.count("truncation")) {
        c.truncation = default_truncation(c.command, c.mode);
    }

    const std::string& cmd = c.command;
    const bool needs_model = cmd == "eval" || cmd == "derive" || cmd == "probe" || cmd == "mc" || cmd == "weld";
    if (needs_model && !c.model)
        rep.fail("model", "is required for command '" + cmd + "'");
    if (c.model) {
        const bool random = c.model->kind == "random_phases" || c.model->kind == "beta";
        if (cmd == "mc" && !random)
            rep.fail("model.kind", "mc needs kind 'random_phases' or 'beta'");
        if (cmd != "mc" && random)
            rep.fail("model.kind", "command '" + cmd + "' needs kind 'terms' or 'rule'");
    }
    if (cmd == "opuc" && c.alphas.empty() == !c.model)
        rep.fail("alphas", "opuc needs exactly one of 'alphas' or 'model'");
    if (cmd == "word" && c.word.empty())
        rep.fail("word", "is required and must be nonempty");
    if (cmd == "cocycle" && c.chains.empty())
        rep.fail("chains", "is required");
    return c;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::string what = e.what();
        const std::size_t cut = what.find("parse error");
        Reporter(source, text).fail_at_offset(e.byte > 0 ? e.byte - 1 : 0,
                                              cut == std::string::npos ? what : what.substr(cut));
    }
    return parse_config(j, source, text);
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

json serialize(const ExperimentConfig& c)
{
    const auto& keys = command_keys().at(c.command);
    json j = json::object();
    auto put = [&](const std::string& k, json v) {
        if (keys.count(k))
            j[k] = std::move(v);
    };
    put("command", c.command);
    put("seed", c.seed);
    put("tol", c.tol);
    put("output", c.output);
    put("grid", c.grid);
    put("truncation", c.truncation);
    put("trials", c.trials);
    put("theta", c.theta);
    put("x0", c.x0);
    put("order", c.order);
    put("mode", c.mode);
    put("threshold", c.threshold);
    put("method", c.method);
    put("m_start", c.m_start);
    put("m_max", c.m_max);
    put("coefficients", c.coefficients);
    if (c.command == "opuc" && !c.alphas.empty())
        put("alphas", complex_list_json(c.alphas));
    if (c.command == "word")
        put("word", chain_json(c.word));
    if (c.command == "cocycle") {
        json a = json::array();
        for (const ChainSpec& ch : c.chains)
            a.push_back(chain_json(ch));
        put("chains", a);
    }
    if (c.model) {
        const ModelSpec& m = *c.model;
        json mj{{"kind", m.kind}};
        if (m.kind == "terms") {
            mj["terms"] = complex_list_json(m.terms);
            if (!m.ordering.empty())
                mj["ordering"] = m.ordering;
        } else if (m.kind == "beta") {
            mj["beta_slope"] = m.beta_slope;
            mj["beta_offset"] = m.beta_offset;
        } else {
            mj["rule"] = m.rule;
        }
        put("model", mj);
    }
    return j;
}

json normalize(const json& j) { return serialize(parse_config(j)); }

ExperimentConfig default_config(const std::string& command)
{
    json j{{"command", command}};
    if (command == "eval" || command == "derive" || command == "probe")
        j["model"] = {{"kind", "rule"}, {"rule", "0.4/n@2"}};
    else if (command == "mc")
        j["model"] = {{"kind", "random_phases"}, {"rule", "n^-0.6@2"}};
    else if (command == "weld")
        j["model"] = {{"kind", "terms"}, {"terms", {0.0, 0.5}}};
    else if (command == "opuc")
        j["alphas"] = {0.3, 0.2};
    else if (command == "word")
        j["word"] = json::array({{{"n", 2}, {"w", 0.3}}, {{"n", 2}, {"w", 0.2}}, {{"n", 3}, {"w", 0.1}}});
    else if (command == "cocycle")
        j["chains"] = json::array({json::array({{{"n", 1}, {"w", 0.3}}, {{"n", 2}, {"w", {0.1, 0.2}}}}),
                                   json::array({{{"n", 2}, {"w", -0.25}}}),
                                   json::array({{{"n", 3}, {"w", {0.0, 0.15}}}})});
    return parse_config(j, "<default " + command + ">");
}

RunOutput run(const ExperimentConfig& cfg, unsigned threads)
{
    RunOutput out;
    const std::string& c = cfg.command;
    if (c == "eval")
        out = run_eval(cfg);
    else if (c == "derive")
        out = run_derive(cfg);
    else if (c == "probe")
        out = run_probe(cfg);
    else if (c == "mc")
        out = run_mc(cfg, threads);
    else if (c == "weld")
        out = run_weld(cfg);
    else if (c == "opuc")
        out = run_opuc(cfg);
    else if (c == "word")
        out = run_word(cfg);
    else if (c == "cocycle")
        out = run_cocycle(cfg);
    else
        throw ConfigError("unknown command '" + c + "'");
    out.summary["command"] = c;
    out.summary["seed"] = cfg.seed;
    out.summary["config"] = serialize(cfg);
    return out;
}

void write_outputs(const ExperimentConfig& cfg, const RunOutput& out, const std::string& out_dir)
{
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path base(out_dir);
    {
        std::ofstream f(base / (cfg.command + ".csv"), std::ios::binary);
        f << out.csv;
        if (!f)
            throw std::runtime_error("cannot write " + (base / (cfg.command + ".csv")).string());
    }
    {
        std::ofstream f(base / (cfg.command + ".json"), std::ios::binary);
        f << out.summary.dump(2) << "\n";
        if (!f)
            throw std::runtime_error("cannot write " + (base / (cfg.command + ".json")).string());
    }
}

int run_command(const ExperimentConfig& cfg, const std::string& out_dir, unsigned threads, std::ostream& err)
{
    try {
        write_outputs(cfg, run(cfg, threads), out_dir);
        return kExitOk;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

} // namespace circlefact::cli
