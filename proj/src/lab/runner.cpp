#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <functional>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "degenlab/lab.hpp"

namespace degenlab {

namespace {

using Json = nlohmann::ordered_json;

Json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

Json record_json(const AuditRecord& r) {
    Json j;
    j["audit"] = r.audit;
    j["kind"] = to_string(r.kind);
    j["subject"] = r.subject;
    Json params = Json::object();
    for (const auto& [k, v] : r.params) params[k] = num(v);
    j["params"] = std::move(params);
    j["left"] = num(r.left);
    j["right"] = num(r.right);
    j["margin"] = num(r.margin);
    j["tolerance"] = num(r.tolerance);
    j["pass"] = r.pass;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

Json study_json(const RefinementStudy& s) {
    Json j;
    j["experiment"] = s.experiment;
    j["sizes"] = s.sizes;
    Json values = Json::array();
    for (double v : s.values) values.push_back(num(v));
    j["values"] = std::move(values);
    j["order"] = num(s.order);
    j["monotone"] = s.monotone;
    j["last_relative_change"] = num(s.last_relative_change);
    if (s.target) j["target"] = num(*s.target);
    return j;
}

/// Everything one job contributes to the report.
struct JobResult {
    std::vector<AuditRecord> records;
    std::vector<RefinementStudy> studies;
    Json distances = Json::array();
    Json details = Json::array();
    double seconds = 0.0;
};

struct Job {
    std::size_t audit = 0;
    std::size_t field = 0;
    int n = 0;
    std::size_t eps = 0;
    std::string label;
};

/// Lazily assembled propagators shared between jobs.
class FormCache {
public:
    explicit FormCache(const ExperimentConfig& config) : config_(config) {
        for (const FieldSpec& f : config.fields) fields_.push_back(f.build());
    }

    Grid grid(int n) const {
        const Box box = config_.fields.front().box();
        if (box.dim == 1) return Grid::line(n, box.lo[0], box.hi[0]);
        return Grid::rectangle(n, config_.ny.value_or(n), box);
    }

    const CoefficientField& field(std::size_t f) const { return fields_[f]; }

    std::shared_ptr<const Propagator> get(std::size_t f, int n, double eps, BoundaryCondition bc) {
        std::shared_ptr<Entry> entry;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto& slot = entries_[std::make_tuple(f, n, eps, static_cast<int>(bc))];
            if (!slot) slot = std::make_shared<Entry>();
            entry = slot;
        }
        std::call_once(entry->once, [&] {
            entry->prop = std::make_shared<const Propagator>(assemble_form(fields_[f], grid(n), bc, eps));
        });
        return entry->prop;
    }

private:
    struct Entry {
        std::once_flag once;
        std::shared_ptr<const Propagator> prop;
    };
    const ExperimentConfig& config_;
    std::vector<CoefficientField> fields_;
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, int, double, int>, std::shared_ptr<Entry>> entries_;
};

/// Smooth random vector: a few low Fourier modes scaled to sup norm `amplitude`.
StateVector smooth_random(const Grid& grid, std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    constexpr int kModes = 4;
    double a[kModes][2];
    double ph[kModes][2];
    for (int k = 0; k < kModes; ++k)
        for (int d = 0; d < 2; ++d) {
            a[k][d] = coef(rng) / (k + 1);
            ph[k][d] = angle(rng);
        }
    const Box& box = grid.box();
    StateVector v(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const Point p = grid.center(i);
        const double sx = (p.x - box.lo[0]) / box.extent(Axis::x);
        const double sy = box.dim == 2 ? (p.y - box.lo[1]) / box.extent(Axis::y) : 0.0;
        double s = 0.0;
        for (int k = 0; k < kModes; ++k) {
            s += a[k][0] * std::sin(M_PI * (k + 1) * sx + ph[k][0]);
            if (box.dim == 2) s += a[k][1] * std::sin(M_PI * (k + 1) * sy + ph[k][1]);
        }
        v(i) = s;
    }
    const double sup = v.cwiseAbs().maxCoeff();
    if (sup > 0.0) v *= amplitude / sup;
    return v;
}

std::uint64_t job_seed(std::uint64_t seed, std::size_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Runner {
public:
    explicit Runner(const ExperimentConfig& config) : config_(config), cache_(config) {}

    std::vector<Job> plan() const {
        std::vector<Job> jobs;
        for (std::size_t a = 0; a < config_.audits.size(); ++a) {
            const AuditSpec& spec = config_.audits[a];
            for (std::size_t f = 0; f < config_.fields.size(); ++f) {
                if (spec.kind == "refinement") {
                    for (std::size_t e = 0; e < config_.eps.size(); ++e) jobs.push_back({a, f, 0, e, ""});
                } else if (spec.kind == "viscosity") {
                    for (int n : config_.sizes) jobs.push_back({a, f, n, 0, ""});
                } else {
                    for (int n : config_.sizes)
                        for (std::size_t e = 0; e < config_.eps.size(); ++e) jobs.push_back({a, f, n, e, ""});
                }
            }
        }
        for (Job& j : jobs) {
            std::ostringstream os;
            os << config_.fields[j.field].name;
            if (j.n > 0) os << " n=" << j.n;
            if (config_.audits[j.audit].kind != "viscosity") os << " eps=" << config_.eps[j.eps];
            os << " " << to_string(config_.boundary);
            j.label = os.str();
        }
        return jobs;
    }

    JobResult run(const Job& job, std::size_t index) {
        const auto start = std::chrono::steady_clock::now();
        JobResult out;
        const AuditSpec& spec = config_.audits[job.audit];
        std::mt19937_64 rng(job_seed(config_.seed, index));
        const double eps = config_.eps[job.eps];
        const std::string& kind = spec.kind;
        if (kind == "refinement") {
            refinement(spec, job, eps, out);
        } else if (kind == "viscosity") {
            viscosity(spec, job, rng, out);
        } else {
            const auto prop = cache_.get(job.field, job.n, eps, config_.boundary);
            const Grid& grid = prop->form().grid();
            auto mask = [&](const std::string& name) { return SetMask::rasterize(grid, config_.set(name).region()); };
            auto times = [&] { return spec.times.empty() ? config_.times : spec.times; };
            if (kind == "distance") {
                distance(spec, job, *prop, mask(spec.sets[0]), mask(spec.sets[1]), out);
            } else if (kind == "gaussian") {
                append(out.records, gaussian_bound_audit(*prop, mask(spec.sets[0]), mask(spec.sets[1]), times(), job.label));
            } else if (kind == "rho") {
                rho(spec, job, *prop, mask(spec.sets[0]), mask(spec.sets[1]), out);
            } else if (kind == "separation") {
                const std::vector<double> ts = spec.times.empty() ? separation_times() : spec.times;
                SeparationVerdict v = separation_audit(*prop, mask(spec.sets[0]), ts, job.label);
                Json d;
                d["type"] = "separation";
                d["subject"] = job.label;
                d["set"] = spec.sets[0];
                Json leak = Json::array();
                for (double x : v.leakage) leak.push_back(num(x));
                d["times"] = v.t_grid;
                d["leakage"] = std::move(leak);
                d["path_distance"] = num(v.path_distance);
                d["set_distance"] = num(v.set_distance);
                d["invariant_one_t"] = v.invariant_one_t;
                d["invariant_all_t"] = v.invariant_all_t;
                d["distance_infinite"] = v.distance_infinite;
                d["distance_positive"] = v.distance_positive;
                d["consistent"] = v.consistent;
                out.details.push_back(std::move(d));
                append(out.records, v.records);
            } else if (kind == "wave") {
                const double tau = config_.wave_constant * grid.h();
                append(out.records, wave_speed_audit(*prop, mask(spec.sets[0]), mask(spec.sets[1]), spec.times.empty() ? config_.times : spec.times, tau, job.label));
            } else if (kind == "twist") {
                std::vector<StateVector> psi;
                for (int s = 0; s < spec.samples; ++s) psi.push_back(smooth_random(grid, rng, spec.amplitude));
                append(out.records, twist_bound_audit(*prop, psi, times(), job.label));
            } else if (kind == "multiplier") {
                const StateVector psi = smooth_random(grid, rng, spec.amplitude);
                std::vector<StateVector> phis;
                for (int s = 0; s < spec.samples; ++s) phis.push_back(smooth_random(grid, rng, 1.0));
                append(out.records, multiplier_bound_audit(prop->form(), psi, phis, job.label));
            } else if (kind == "boundary_ordering") {
                boundary_ordering(spec, job, eps, out);
            }
        }
        for (AuditRecord& r : out.records) {
            auto& p = r.params;
            p.insert(p.begin(), {"eps", job.n > 0 || kind == "refinement" ? eps : 0.0});
            if (job.n > 0) p.insert(p.begin(), {"n", static_cast<double>(job.n)});
        }
        out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return out;
    }

private:
    static void append(std::vector<AuditRecord>& to, const std::vector<AuditRecord>& from) {
        to.insert(to.end(), from.begin(), from.end());
    }

    static Json distance_json(const DistanceReport& r, const Grid& grid, const std::string& subject,
                              const std::vector<std::string>& sets) {
        Json j;
        j["subject"] = subject;
        j["sets"] = sets;
        j["mode"] = to_string(r.mode);
        j["value"] = num(r.value);
        j["path_value"] = num(r.path_value);
        j["certificate_checksum"] = r.certificate ? Json(hex64(fingerprint(*r.certificate))) : Json(nullptr);
        j["certificate_norm"] = r.certificate ? num(r.certificate_norm) : Json(nullptr);
        j["rescale"] = r.rescale;
        j["grid_hash"] = hex64(fingerprint(grid));
        return j;
    }

    void distance(const AuditSpec& spec, const Job& job, const Propagator& prop, const SetMask& a, const SetMask& b,
                  JobResult& out) {
        const Grid& grid = prop.form().grid();
        const DistanceMode mode = distance_mode_from_string(spec.mode);
        const DistanceReport r = mode == DistanceMode::riemannian
                                     ? riemannian_distance(cache_.field(job.field), grid, a, b)
                                     : set_distance(prop.form(), a, b, mode);
        out.distances.push_back(distance_json(r, grid, job.label, spec.sets));
        const std::string name = "distance_" + spec.mode;
        if (r.certificate) {
            AuditRecord rec = certificate_audit(prop.form(), r);
            rec.subject = job.label;
            out.records.push_back(std::move(rec));
        }
        const double h = grid.h();
        if (spec.expect)
            out.records.push_back(make_record(name + "_expect", RecordKind::continuum, job.label,
                                              {{"value", r.value}, {"expect", *spec.expect}},
                                              std::abs(r.value - *spec.expect), spec.tolerance_cells * h, 0.0));
        if (spec.at_most_cells)
            out.records.push_back(make_record(name + "_at_most", RecordKind::continuum, job.label, {{"value", r.value}},
                                              r.value, *spec.at_most_cells * h, 0.0));
        if (spec.finite) {
            const bool ok = std::isfinite(r.value) == *spec.finite;
            AuditRecord rec = make_record(name + "_finite", RecordKind::continuum, job.label, {{"value", r.value}},
                                          ok ? 0.0 : 1.0, 0.0, 0.0);
            out.records.push_back(std::move(rec));
        }
    }

    void rho(const AuditSpec& spec, const Job& job, const Propagator& prop, const SetMask& a, const SetMask& b,
             JobResult& out) {
        const DistanceReport r = set_distance(prop.form(), a, b, DistanceMode::d);
        if (!r.certificate) {
            Json d;
            d["type"] = "rho";
            d["subject"] = job.label;
            d["note"] = "infinite distance: no certificate to optimise";
            out.details.push_back(std::move(d));
            return;
        }
        const RhoTrace tr = rho_optimization_trace(prop.form(), *r.certificate, a, b, spec.t, r.scope);
        Json d;
        d["type"] = "rho";
        d["subject"] = job.label;
        d["t"] = spec.t;
        d["gap"] = num(tr.gap);
        d["rho_star"] = num(tr.rho_star);
        d["closed_form"] = num(tr.closed_form);
        d["grid_argmin"] = tr.rho.empty() ? 0.0 : tr.rho[tr.argmin];
        d["grid_min"] = num(tr.grid_min);
        d["rho"] = tr.rho;
        Json values = Json::array();
        for (double v : tr.value) values.push_back(num(v));
        d["values"] = std::move(values);
        out.details.push_back(std::move(d));
        const double step = tr.rho.size() > 1 ? std::log(tr.rho[1] / tr.rho[0]) : 0.0;
        const double offset = tr.rho.empty() ? 0.0 : std::abs(std::log(tr.rho[tr.argmin] / tr.rho_star));
        out.records.push_back(make_record("rho_argmin", RecordKind::continuum, job.label,
                                          {{"t", spec.t}, {"rho_star", tr.rho_star}}, offset, step, 0.0));
        out.records.push_back(make_record("rho_value", RecordKind::continuum, job.label,
                                          {{"t", spec.t}, {"closed_form", tr.closed_form}},
                                          std::abs(tr.grid_min - tr.closed_form), 0.05 * tr.closed_form, 0.0));
    }

    void refinement(const AuditSpec& spec, const Job& job, double eps, JobResult& out) {
        const std::string label = config_.fields[job.field].name + " eps=" + [&] {
            std::ostringstream os;
            os << eps;
            return os.str();
        }() + " " + to_string(config_.boundary);
        auto mask = [&](const Grid& g, const std::string& name) {
            return SetMask::rasterize(g, config_.set(name).region());
        };
        std::function<double(int)> observable;
        if (spec.observable == "leakage") {
            observable = [&](int n) {
                const auto prop = cache_.get(job.field, n, eps, config_.boundary);
                return leakage_norm(*prop, mask(prop->form().grid(), spec.sets[0]), spec.t);
            };
        } else if (spec.observable == "distance") {
            observable = [&](int n) {
                const auto prop = cache_.get(job.field, n, eps, config_.boundary);
                const Grid& g = prop->form().grid();
                return set_distance(prop->form(), mask(g, spec.sets[0]), mask(g, spec.sets[1]), DistanceMode::d).value;
            };
        } else {
            observable = [&](int n) {
                const Grid g = cache_.grid(n);
                return riemannian_distance(cache_.field(job.field), g, mask(g, spec.sets[0]), mask(g, spec.sets[1])).value;
            };
        }
        RefinementStudy s = refinement_study(spec.observable + ":" + label, spec.sizes, observable, spec.target);
        if (spec.min_order)
            out.records.push_back(make_record("refinement_order", RecordKind::continuum, label,
                                              {{"order", s.order}}, *spec.min_order, s.order, 0.0));
        if (spec.below)
            out.records.push_back(make_record("refinement_below", RecordKind::continuum, label,
                                              {{"last", s.values.back()}}, s.values.back(), *spec.below, 0.0));
        if (spec.max_relative_change)
            out.records.push_back(make_record("refinement_settled", RecordKind::continuum, label, {},
                                              s.last_relative_change, *spec.max_relative_change, 0.0));
        out.studies.push_back(std::move(s));
    }

    void viscosity(const AuditSpec& spec, const Job& job, std::mt19937_64& rng, JobResult& out) {
        const Grid grid = cache_.grid(job.n);
        const StateVector phi = smooth_random(grid, rng, 1.0);
        const ViscosityStudy v =
            viscosity_limit_study(cache_.field(job.field), grid, config_.boundary, phi, spec.lambda, spec.eps);
        Json d;
        d["type"] = "viscosity";
        d["subject"] = job.label;
        d["lambda"] = v.lambda;
        Json steps = Json::array();
        for (const ViscosityStep& s : v.steps) {
            Json o;
            o["eps"] = s.eps;
            o["test_form_value"] = num(s.test_form_value);
            o["own_form_value"] = num(s.own_form_value);
            o["gap_to_previous"] = num(s.gap_to_previous);
            o["gap_to_limit"] = num(s.gap_to_limit);
            steps.push_back(std::move(o));
        }
        d["steps"] = std::move(steps);
        d["observed_rates"] = v.observed_rates;
        d["cauchy"] = v.cauchy;
        d["form_values_nonincreasing"] = v.form_values_nonincreasing;
        d["final_gap"] = num(v.final_gap);
        out.details.push_back(std::move(d));
        out.records.push_back(make_record("viscosity_cauchy", RecordKind::continuum, job.label, {},
                                          v.cauchy ? 0.0 : 1.0, 0.0, 0.0));
        out.records.push_back(make_record("viscosity_final_gap", RecordKind::continuum, job.label,
                                          {{"eps", spec.eps.back()}}, v.final_gap, 1e-3, 0.0));
        out.records.push_back(make_record("viscosity_monotone", RecordKind::continuum, job.label, {},
                                          v.form_values_nonincreasing ? 0.0 : 1.0, 0.0, 0.0));
    }

    void boundary_ordering(const AuditSpec& spec, const Job& job, double eps, JobResult& out) {
        const auto neu = cache_.get(job.field, job.n, eps, BoundaryCondition::neumann);
        const auto dir = cache_.get(job.field, job.n, eps, BoundaryCondition::dirichlet);
        const Grid& g = neu->form().grid();
        const SetMask a = SetMask::rasterize(g, config_.set(spec.sets[0]).region());
        const SetMask b = SetMask::rasterize(g, config_.set(spec.sets[1]).region());
        const double d_n = set_distance(neu->form(), a, b, DistanceMode::d).value;
        const double d_d = set_distance(dir->form(), a, b, DistanceMode::d).value;
        const double d1_n = set_distance(neu->form(), a, b, DistanceMode::d1).value;
        const double d1_d = set_distance(dir->form(), a, b, DistanceMode::d1).value;
        const std::string label = config_.fields[job.field].name + " n=" + std::to_string(job.n);
        auto gap = [](double x, double y) { return x == y ? 0.0 : std::abs(x - y); };
        out.records.push_back(make_record("boundary_d_independent", RecordKind::certified, label,
                                          {{"d_neumann", d_n}, {"d_dirichlet", d_d}}, gap(d_d, d_n), 0.0, 0.0));
        out.records.push_back(make_record("boundary_d1_neumann_equals_d", RecordKind::certified, label,
                                          {{"d1_neumann", d1_n}}, gap(d1_n, d_n), 0.0, 0.0));
        out.records.push_back(make_record("boundary_d1_dirichlet_below_d", RecordKind::certified, label,
                                          {{"d1_dirichlet", d1_d}}, d1_d, std::min(d_n, d_d), 0.0));
    }

    const ExperimentConfig& config_;
    FormCache cache_;
};

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config) {
    const std::string started = iso_now();
    const auto t0 = std::chrono::steady_clock::now();
    Runner runner(config);
    const std::vector<Job> jobs = runner.plan();
    std::vector<JobResult> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());

    int workers = config.jobs > 0 ? config.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                results[i] = runner.run(jobs[i], i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw ConfigError("audits[" + std::to_string(jobs[i].audit) + "] (" + config.audits[jobs[i].audit].kind +
                              ", " + jobs[i].label + "): " + e.what());
        }
    }

    RunReport report;
    Json records = Json::array();
    Json distances = Json::array();
    Json details = Json::array();
    Json studies = Json::array();
    Json timing_jobs = Json::array();
    int observational_failures = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        JobResult& r = results[i];
        for (const AuditRecord& rec : r.records) {
            records.push_back(record_json(rec));
            if (!rec.pass) {
                if (rec.kind == RecordKind::certified) ++report.certified_failures;
                if (rec.kind == RecordKind::continuum) ++report.continuum_failures;
                if (rec.kind == RecordKind::observational) ++observational_failures;
            }
        }
        for (auto& d : r.distances) distances.push_back(std::move(d));
        for (auto& d : r.details) details.push_back(std::move(d));
        for (const RefinementStudy& s : r.studies) studies.push_back(study_json(s));
        report.records.insert(report.records.end(), r.records.begin(), r.records.end());
        report.studies.insert(report.studies.end(), r.studies.begin(), r.studies.end());
        Json tj;
        tj["job"] = i;
        tj["audit"] = config.audits[jobs[i].audit].kind;
        tj["subject"] = jobs[i].label;
        tj["seconds"] = r.seconds;
        timing_jobs.push_back(std::move(tj));
    }

    Json j;
    j["schema_version"] = kSchemaVersion;
    j["scenario"] = config.scenario;
    // Worker count and output directory do not affect results; keeping them out
    // makes reports comparable across --jobs and --out.
    Json echo = Json::parse(config_echo(config));
    echo.erase("jobs");
    echo.erase("output");
    j["config"] = std::move(echo);
    Json summary;
    summary["records"] = report.records.size();
    summary["certified_failures"] = report.certified_failures;
    summary["continuum_failures"] = report.continuum_failures;
    summary["observational_failures"] = observational_failures;
    summary["exit_code"] = exit_code(report);
    j["summary"] = std::move(summary);
    j["records"] = std::move(records);
    j["distances"] = std::move(distances);
    j["refinement"] = std::move(studies);
    j["details"] = std::move(details);
    report.json = j.dump(2) + "\n";

    Json timing;
    timing["scenario"] = config.scenario;
    timing["started"] = started;
    timing["finished"] = iso_now();
    timing["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    timing["workers"] = workers;
    timing["jobs"] = std::move(timing_jobs);
    report.timing_json = timing.dump(2) + "\n";
    return report;
}

int exit_code(const RunReport& report) {
    if (report.certified_failures > 0) return 2;
    if (report.continuum_failures > 0) return 3;
    return 0;
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("report.json");
        out << report.json;
    }
    {
        auto out = open("records.csv");
        out << "audit,kind,subject,params,left,right,margin,tolerance,pass,note\n";
        for (const AuditRecord& r : report.records) {
            std::string params;
            for (const auto& [k, v] : r.params) params += (params.empty() ? "" : ";") + k + "=" + csv_number(v);
            out << csv_field(r.audit) << ',' << to_string(r.kind) << ',' << csv_field(r.subject) << ','
                << csv_field(params) << ',' << csv_number(r.left) << ',' << csv_number(r.right) << ','
                << csv_number(r.margin) << ',' << csv_number(r.tolerance) << ',' << (r.pass ? "true" : "false") << ','
                << csv_field(r.note) << '\n';
        }
    }
    {
        auto out = open("refinement.csv");
        out << "experiment,n,value,order,monotone,last_relative_change\n";
        for (const RefinementStudy& s : report.studies)
            for (std::size_t k = 0; k < s.sizes.size(); ++k)
                out << csv_field(s.experiment) << ',' << s.sizes[k] << ',' << csv_number(s.values[k]) << ','
                    << csv_number(s.order) << ',' << (s.monotone ? "true" : "false") << ','
                    << csv_number(s.last_relative_change) << '\n';
    }
    {
        auto out = open("timing.json");
        out << report.timing_json;
    }
}

}  // namespace degenlab
