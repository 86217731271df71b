#include "mfsg/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "mfsg/errors.hpp"
#include "mfsg/rng.hpp"

namespace mfsg {

namespace fs = std::filesystem;

namespace {

// Stream ids for the seeded stages that take a raw seed.
constexpr std::uint64_t kColiseumStream = 0x636f6c69;
constexpr std::uint64_t kSurveyStream = 0x686f6c64;
constexpr std::uint64_t kBoundStream = 0x626f756e;

// Consecutive-depth pressure differences above this make t unreliable.
constexpr double kGapWarning = 1e-2;

const char* const kSections[] = {"conditions", "free_energy", "spectrum", "rigidity", "coliseum", "holder", "bound"};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

OrderedJson condition_json(const ConditionReport& r) {
    OrderedJson j;
    j["passed"] = r.passed;
    j["margin"] = number_json(r.margin);
    j["details"] = r.details;
    return j;
}

OrderedJson point_json(const SpherePoint& p) {
    if (p.at_infinity) return "infinity";
    return OrderedJson::array({p.value.real(), p.value.imag()});
}

class Pipeline {
public:
    Pipeline(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err)
        : cfg_(cfg), opt_(opt), out_(out), err_(err), mm_(cfg.multimap()), dir_(opt.out_dir ? *opt.out_dir : cfg.output_dir) {
        load_summary();
    }

    int verify();
    int pressure();
    int spectrum();
    int rigidity();
    int coliseum(bool write_field, bool survey);
    int bound();
    int all();
    void save();

private:
    void load_summary();
    void write_file(const std::string& name, const std::string& content);
    void ensure_seed();
    void ensure_cloud();
    void ensure_tables();
    void ensure_table();
    std::optional<double> gamma();
    void ensure_field();
    bool verify_gate();
    std::optional<SpectrumTable> known_spectrum() const;

    const RunConfig& cfg_;
    const CommandOptions& opt_;
    std::ostream& out_;
    std::ostream& err_;
    MultiMap mm_;
    fs::path dir_;
    std::map<std::string, OrderedJson> sections_;
    std::set<std::string> files_;

    std::optional<SeedPoint> seed_;
    std::optional<JuliaCloud> cloud_;
    std::optional<bool> verified_;
    bool forced_note_ = false;
    std::optional<LeafTables> tables_;
    std::optional<FreeEnergyTable> ft_;
    bool gamma_tried_ = false;
    std::optional<double> gamma_;
    std::optional<SpectrumTable> st_;
    std::optional<PixelField> field_;
};

void Pipeline::load_summary() {
    std::ifstream in(dir_ / "summary.json");
    if (!in) return;
    OrderedJson j;
    try {
        j = OrderedJson::parse(in);
    } catch (const OrderedJson::exception&) {
        return;
    }
    if (!j.is_object() || j.value("schema_version", 0) != kSummarySchemaVersion || j.value("config_digest", "") != cfg_.digest)
        return;
    for (const char* s : kSections)
        if (j.contains(s)) sections_[s] = j[s];
    if (j.contains("files") && j["files"].is_array())
        for (const auto& f : j["files"])
            if (f.is_string() && fs::exists(dir_ / f.get<std::string>())) files_.insert(f.get<std::string>());
}

void Pipeline::write_file(const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    std::ofstream os(dir_ / name, std::ios::binary | std::ios::trunc);
    os << content;
    if (!os) throw Error(ErrorClass::numeric, (dir_ / name).string() + ": write failed");
    files_.insert(name);
}

void Pipeline::save() {
    OrderedJson j;
    j["schema_version"] = kSummarySchemaVersion;
    j["config_digest"] = cfg_.digest;
    OrderedJson maps = OrderedJson::array();
    for (const auto& f : cfg_.maps) maps.push_back(map_to_json(f));
    j["maps"] = maps;
    j["probabilities"] = cfg_.probabilities;
    j["potential"] = potential_name(cfg_.potential);
    for (const char* s : kSections)
        if (sections_.count(s)) j[s] = sections_[s];
    files_.insert("summary.json");
    j["files"] = OrderedJson(std::vector<std::string>(files_.begin(), files_.end()));
    write_file("summary.json", dump_json(j));
}

void Pipeline::ensure_seed() {
    if (!seed_) seed_ = repelling_fixed_point(mm_[0], 0);
}

void Pipeline::ensure_cloud() {
    if (cloud_) return;
    ensure_seed();
    cloud_ = build_julia_cloud(mm_, *seed_, cfg_.julia_target_count, cfg_.rng_seed);
}

void Pipeline::ensure_tables() {
    if (tables_) return;
    ensure_seed();
    const int depth = cfg_.depth ? *cfg_.depth : auto_depth(mm_);
    tables_ = build_leaf_tables(mm_, cfg_.psi(), seed_->point, depth);
}

void Pipeline::ensure_table() {
    if (ft_) return;
    ensure_tables();
    ft_ = free_energy_table(*tables_, cfg_.betas());
}

std::optional<double> Pipeline::gamma() {
    if (!gamma_tried_) {
        gamma_tried_ = true;
        ensure_tables();
        try {
            gamma_ = gamma_root(*tables_);
        } catch (const NotMonotone& e) {
            err_ << "note: gamma unavailable: " << e.what() << '\n';
        }
    }
    return gamma_;
}

int Pipeline::verify() {
    ensure_cloud();
    const auto sep = check_separation(mm_, *cloud_);
    const auto exp = check_expansion(mm_, *cloud_, cfg_.expansion_depth, cfg_.expansion_samples, cfg_.rng_seed);
    verified_ = sep.passed && exp.passed;

    OrderedJson j;
    j["passed"] = *verified_;
    j["seed"] = {{"point", point_json(seed_->point)}, {"map_index", seed_->map_index}, {"multiplier", seed_->multiplier}};
    j["cloud"] = {{"size", cloud_->size()}, {"resolution", cloud_->resolution()}};
    j["separation"] = condition_json(sep);
    j["expansion"] = condition_json(exp);
    sections_["conditions"] = j;
    std::ostringstream csv;
    write_cloud_csv(*cloud_, csv);
    write_file("julia_cloud.csv", csv.str());

    out_ << "cloud: " << cloud_->size() << " points, resolution " << fmt(cloud_->resolution()) << '\n';
    out_ << "separation: " << (sep.passed ? "PASS" : "FAIL") << " margin " << fmt(sep.margin) << " (" << sep.details << ")\n";
    out_ << "expansion: " << (exp.passed ? "PASS" : "FAIL") << " (" << exp.details << ")\n";
    return *verified_ ? 0 : 3;
}

bool Pipeline::verify_gate() {
    if (!verified_) {
        const int code = verify();
        (void)code;
    }
    if (*verified_) return true;
    if (opt_.force) {
        if (!forced_note_) out_ << "conditions failed; continuing because of --force\n";
        forced_note_ = true;
        return true;
    }
    err_ << "condition checks failed; rerun with --force to compute anyway\n";
    return false;
}

int Pipeline::pressure() {
    ensure_table();
    const auto& ft = *ft_;
    OrderedJson j;
    j["depth"] = ft.depth;
    j["leaves"] = tables_->lower.size();
    j["beta"] = {{"min", cfg_.beta_min}, {"max", cfg_.beta_max}, {"steps", cfg_.beta_steps}};
    const auto z = ft.zero_index();
    j["delta"] = z ? number_json(ft.t[*z]) : OrderedJson(nullptr);
    j["gap_at_zero"] = number_json(ft.gap_at_zero);
    j["max_gap"] = number_json(*std::max_element(ft.gap.begin(), ft.gap.end()));
    j["max_residual"] = number_json(*std::max_element(ft.residual.begin(), ft.residual.end()));
    j["min_second_difference"] = number_json(ft.min_second_difference);
    j["convex"] = ft.min_second_difference >= -1e-4;
    j["monotone_in_u"] = ft.monotone_in_u;
    std::vector<double> wide;
    for (std::size_t k = 0; k < ft.gap.size(); ++k)
        if (ft.gap[k] > kGapWarning) wide.push_back(ft.betas[k]);
    j["gap_warning"] = {{"threshold", kGapWarning}, {"betas", wide}};
    sections_["free_energy"] = j;
    std::ostringstream csv;
    write_free_energy_csv(ft, csv);
    write_file("free_energy.csv", csv.str());
    out_ << "depth: " << ft.depth << " (" << tables_->lower.size() << " leaves)\n";
    if (z) out_ << "delta: " << fmt(ft.t[*z]) << " gap " << fmt(ft.gap_at_zero) << '\n';
    out_ << "convexity: min second difference " << fmt(ft.min_second_difference) << '\n';
    if (!wide.empty())
        out_ << "warning: truncation gap above " << fmt(kGapWarning) << " at " << wide.size() << " grid points (beta "
             << fmt(wide.front()) << " .. " << fmt(wide.back()) << "); raise depth or narrow the beta range\n";
    return 0;
}

int Pipeline::spectrum() {
    if (!verify_gate()) return 3;
    if (!ft_) pressure();
    st_ = spectrum_parametric(*ft_, gamma());
    const auto& st = *st_;
    const auto props = spectrum_properties(*ft_, st);
    OrderedJson j;
    j["alpha_minus"] = st.alpha_minus;
    j["alpha_zero"] = st.alpha_zero;
    j["alpha_plus"] = st.alpha_plus;
    j["delta"] = st.delta;
    j["gamma"] = st.gamma ? number_json(*st.gamma) : OrderedJson(nullptr);
    j["trivial"] = st.trivial;
    j["linearity_residual"] = number_json(st.linearity_residual);
    j["forced"] = !*verified_;
    j["properties"] = {{"convex", props.convex()},
                       {"t_min_second_difference", number_json(props.t_min_second_difference)},
                       {"concave", props.concave()},
                       {"s_max_slope_increase", number_json(props.s_max_slope_increase)},
                       {"range_ordered", props.range_ordered},
                       {"apex", props.apex()},
                       {"apex_error", number_json(props.apex_error)},
                       {"interior_positive", props.interior_positive},
                       {"all", props.all()}};
    sections_["spectrum"] = j;
    std::ostringstream csv, svg;
    write_spectrum_csv(st, csv);
    write_file("spectrum.csv", csv.str());
    write_spectrum_svg(st, svg);
    write_file("spectrum.svg", svg.str());
    out_ << "alpha: [" << fmt(st.alpha_minus) << ", " << fmt(st.alpha_plus) << "] alpha_zero " << fmt(st.alpha_zero) << '\n';
    if (st.gamma) out_ << "gamma: " << fmt(*st.gamma) << '\n';
    out_ << "trivial: " << (st.trivial ? "yes" : "no") << '\n';
    out_ << "properties: " << (props.all() ? "all hold" : "VIOLATED") << '\n';
    return 0;
}

int Pipeline::rigidity() {
    ensure_table();
    const auto g = gamma();
    if (!g) throw NotMonotone("rigidity: gamma is undefined for this potential");
    const auto z = ft_->zero_index();
    if (!z) throw GridTooCoarse("rigidity: beta grid lacks 0");
    const auto r = rigidity_test(mm_, cfg_.psi_constants(), *ft_, *g, ft_->t[*z]);
    OrderedJson j;
    j["verdict"] = verdict_name(r.verdict);
    j["lambda_values"] = r.lambda_values;
    j["lambda_spread"] = r.lambda_spread;
    j["lambda_hat"] = r.lambda_hat;
    j["t_linearity_residual"] = number_json(r.t_linearity_residual);
    j["syntactic_power_map"] = r.syntactic_power_map;
    j["consistency"] = number_json(r.consistency);
    j["consistent"] = r.consistent;
    sections_["rigidity"] = j;
    out_ << "rigidity: " << verdict_name(r.verdict) << " lambda_hat " << fmt(r.lambda_hat) << " |lambda_hat + gamma/delta| "
         << fmt(r.consistency) << '\n';
    return 0;
}

void Pipeline::ensure_field() {
    if (field_) return;
    ColiseumSetup setup;
    setup.window = cfg_.window;
    setup.width = cfg_.width;
    setup.height = cfg_.height;
    setup.escape_radius = cfg_.escape_radius;
    setup.traps = cfg_.traps;
    if (cfg_.samples > 0) {
        field_ = coliseum_monte_carlo(mm_, cfg_.probabilities, setup, cfg_.samples, substream_key(cfg_.rng_seed, kColiseumStream));
    } else {
        field_ = coliseum_fixed_point(mm_, cfg_.probabilities, setup, cfg_.tol);
    }

    const double R = cfg_.escape_radius > 0.0 ? cfg_.escape_radius : min_escape_radius(mm_);
    OrderedJson j;
    j["mode"] = mode_name(field_->mode);
    j["window"] = {cfg_.window.x0, cfg_.window.x1, cfg_.window.y0, cfg_.window.y1};
    j["resolution"] = {cfg_.width, cfg_.height};
    j["escape_radius"] = R;
    OrderedJson traps = OrderedJson::array();
    for (const auto& t : cfg_.traps) traps.push_back({{"center", point_json(t.center)}, {"radius", t.radius}, {"label", t.label}});
    j["traps"] = traps;
    if (field_->mode == PixelField::Mode::monte_carlo) {
        j["samples"] = field_->samples;
        j["flagged"] = field_->flagged;
    } else {
        j["tol"] = field_->tol;
        j["iterations"] = field_->iterations;
        j["residual"] = number_json(field_->residual);
        j["reapply_change"] = number_json(coliseum_reapply(mm_, cfg_.probabilities, setup, *field_));
    }
    const auto [lo, hi] = std::minmax_element(field_->values.begin(), field_->values.end());
    j["min_value"] = *lo;
    j["max_value"] = *hi;
    OrderedJson sugg = OrderedJson::array();
    for (const auto& t : suggest_traps(mm_)) sugg.push_back({{"center", point_json(t.center)}, {"radius", t.radius}, {"label", t.label}});
    j["suggested_traps"] = sugg;
    sections_["coliseum"] = j;
}

std::optional<SpectrumTable> Pipeline::known_spectrum() const {
    if (st_) return st_;
    const auto it = sections_.find("spectrum");
    if (it == sections_.end()) return std::nullopt;
    const auto& j = it->second;
    if (!j.contains("alpha_minus") || !j.contains("alpha_plus") || !j["alpha_minus"].is_number() || !j["alpha_plus"].is_number())
        return std::nullopt;
    SpectrumTable st;
    st.alpha_minus = j["alpha_minus"].get<double>();
    st.alpha_plus = j["alpha_plus"].get<double>();
    st.trivial = j.value("trivial", false);
    return st;
}

int Pipeline::coliseum(bool write_field, bool survey) {
    ensure_field();
    const auto& f = *field_;
    if (write_field) {
        std::ostringstream grid;
        OrderedJson meta;
        meta["config_digest"] = cfg_.digest;
        write_field_grid(f, grid, meta);
        write_file("field.grid", grid.str());
        std::error_code ec;
        fs::create_directories(dir_, ec);
        write_field_png(f, (dir_ / "field.png").string());
        files_.insert("field.png");
        const auto& j = sections_["coliseum"];
        out_ << "field: " << f.width << "x" << f.height << " " << mode_name(f.mode);
        if (f.mode == PixelField::Mode::fixed_point)
            out_ << " iterations " << f.iterations << " residual " << fmt(f.residual);
        else
            out_ << " samples " << f.samples << " flagged " << f.flagged;
        out_ << " escape radius " << fmt(j["escape_radius"].get<double>()) << '\n';
    }
    if (!survey) return 0;

    ensure_cloud();
    const double pitch = std::max(f.dx(), f.dy());
    const double cap = std::min(f.window.width(), f.window.height()) / 4.0;
    Radii radii{cfg_.holder_r0 > 0.0 ? cfg_.holder_r0 : 2.0 * pitch, cfg_.holder_ratio, cfg_.holder_count};
    if (cfg_.holder_r0 <= 0.0)
        while (radii.count > 5 && radii.r0 * std::pow(radii.ratio, radii.count - 1) > cap * (1.0 + 1e-9)) --radii.count;
    const auto known = known_spectrum();
    const auto rep = holder_survey(f, *cloud_, cfg_.holder_points, radii, substream_key(cfg_.rng_seed, kSurveyStream),
                                   known ? &*known : nullptr, mm_.size() == 1);
    std::ostringstream csv;
    write_holder_csv(rep, csv);
    write_file("holder.csv", csv.str());

    OrderedJson j;
    j["radii"] = {{"r0", radii.r0}, {"ratio", radii.ratio}, {"count", radii.count}};
    j["n_points"] = cfg_.holder_points;
    j["rows"] = rep.rows.size();
    j["well_fitted"] = rep.well_fitted;
    j["degenerate"] = rep.degenerate;
    j["outside_window"] = rep.outside_window;
    j["min_exponent"] = number_json(rep.well_fitted ? rep.min_exponent : NAN);
    j["max_exponent"] = number_json(rep.well_fitted ? rep.max_exponent : NAN);
    j["holder_continuity_proxy"] = "empirical minimum exponent";
    OrderedJson hist = OrderedJson::array();
    for (const auto& [edge, count] : rep.histogram) hist.push_back({edge, count});
    j["histogram"] = hist;
    if (rep.single_map) j["note"] = "single-map case: U_tau analysis inapplicable";
    if (rep.compared) {
        j["comparison"] = {{"alpha_minus", known->alpha_minus}, {"alpha_plus", known->alpha_plus},  {"slack", rep.slack},
                           {"min_ok", rep.min_ok},            {"max_ok", rep.max_ok},            {"fraction_in_range", rep.fraction_in_range}};
    }
    sections_["holder"] = j;
    out_ << "holder: " << rep.well_fitted << "/" << rep.rows.size() << " well fitted";
    if (rep.well_fitted) out_ << ", exponents [" << fmt(rep.min_exponent) << ", " << fmt(rep.max_exponent) << "]";
    if (rep.compared) out_ << ", in spectrum range " << fmt(rep.fraction_in_range);
    out_ << '\n';
    if (rep.single_map) out_ << "note: single-map case: U_tau analysis inapplicable\n";
    return 0;
}

int Pipeline::bound() {
    const double b = alpha_minus_bound(mm_, cfg_.probabilities, cfg_.bound_sequences, cfg_.bound_seq_len,
                                       substream_key(cfg_.rng_seed, kBoundStream));
    OrderedJson j;
    j["value"] = b;
    j["n_sequences"] = cfg_.bound_sequences;
    j["seq_len"] = cfg_.bound_seq_len;
    j["below_one"] = b < 1.0;
    out_ << "bound: " << fmt(b) << (b < 1.0 ? " (< 1)" : " (>= 1)") << '\n';
    if (const auto known = known_spectrum()) {
        j["minus_alpha_minus"] = b - known->alpha_minus;
        out_ << "bound - alpha_minus: " << fmt(b - known->alpha_minus) << '\n';
    }
    sections_["bound"] = j;
    return 0;
}

int Pipeline::all() {
    if (!verify_gate()) return 3;
    pressure();
    spectrum();
    const auto c = cfg_.psi_constants();
    if (gamma() && std::all_of(c.begin(), c.end(), [](double x) { return x < 0.0; }))
        rigidity();
    else
        out_ << "rigidity: skipped (needs psi < 0)\n";
    if (mm_.all_polynomial()) {
        coliseum(true, cfg_.holder);
        bound();
    } else {
        out_ << "coliseum, bound: skipped (needs polynomial generators)\n";
    }
    return 0;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"verify", "pressure", "spectrum", "rigidity", "coliseum", "hoelder", "bound", "all"};
    return names;
}

int run_command(const std::string& command, const RunConfig& config, const CommandOptions& options, std::ostream& out,
                std::ostream& err) {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end()) {
        err << "error: unknown command '" << command << "'\n";
        return 2;
    }
    int code = 0;
    try {
        Pipeline p(config, options, out, err);
        try {
            if (command == "verify") code = p.verify();
            else if (command == "pressure") code = p.pressure();
            else if (command == "spectrum") code = p.spectrum();
            else if (command == "rigidity") code = p.rigidity();
            else if (command == "coliseum") code = p.coliseum(true, config.holder);
            else if (command == "hoelder") code = p.coliseum(false, true);
            else if (command == "bound") code = p.bound();
            else code = p.all();
        } catch (...) {
            p.save();
            throw;
        }
        p.save();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    }
    return code;
}

}  // namespace mfsg
