#include "qdyn/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace qdyn::io {

using json = nlohmann::ordered_json;
using channels::OperatorBasis;
using channels::ProcessMatrix;

namespace {

json parse(const std::string &text, const char *format) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw FormatError(std::string(format) + ": " + e.what());
    }
    if (!j.is_object() || j.value("format", "") != format) {
        throw FormatError(std::string("expected a ") + format + " document");
    }
    return j;
}

template <class T>
T field(const json &j, const char *key) {
    if (!j.contains(key)) {
        throw FormatError(std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw FormatError(std::string("field '") + key + "': " + e.what());
    }
}

double number_or_nan(const json &j, const char *key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return measures::kNaN;
    }
    return j.at(key).get<double>();
}

json number(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json matrix_entries(const CMatrix &m) {
    json e = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            e.push_back({m(r, c).real(), m(r, c).imag()});
        }
    }
    return e;
}

CMatrix entries_matrix(const json &e, int n) {
    if (!e.is_array() || static_cast<int>(e.size()) != n * n) {
        throw FormatError("entries: expected " + std::to_string(n * n) + " complex numbers");
    }
    CMatrix m(n, n);
    for (int i = 0; i < n * n; ++i) {
        const auto &z = e[i];
        if (!z.is_array() || z.size() != 2) {
            throw FormatError("entries: each entry must be [re, im]");
        }
        m(i / n, i % n) = cplx(z[0].get<double>(), z[1].get<double>());
    }
    return m;
}

json chi_json(const ProcessMatrix &p, const std::string &target) {
    json j;
    j["format"] = "chi-v1";
    j["dim"] = p.dim();
    j["basis_tag"] = p.basis.tag();
    j["tp_mode"] = channels::to_string(p.tp_mode);
    if (p.basis.kind() == OperatorBasis::Kind::TargetAdapted) {
        if (target.empty()) {
            throw ParameterError("chi_to_json: adapted-basis process needs a target name");
        }
        j["target"] = target;
    }
    j["entries"] = matrix_entries(p.chi);
    return j;
}

ProcessMatrix chi_from(const json &j) {
    const int dim = field<int>(j, "dim");
    if (dim < 1) {
        throw FormatError("chi-v1: dim must be positive");
    }
    const auto tag = field<std::string>(j, "basis_tag");
    ProcessMatrix p;
    if (tag == "computational") {
        p.basis = OperatorBasis::computational(dim);
    } else if (tag == "pauli") {
        int n = 0;
        while ((1 << n) < dim) {
            ++n;
        }
        p.basis = OperatorBasis::pauli(n);
    } else if (tag == "adapted") {
        p.basis = channels::adapted_basis(channels::target_by_name(field<std::string>(j, "target")));
    } else {
        throw FormatError("chi-v1: unknown basis_tag '" + tag + "'");
    }
    if (p.basis.dim() != dim) {
        throw FormatError("chi-v1: basis does not match dim");
    }
    p.tp_mode = channels::tp_mode_from_string(field<std::string>(j, "tp_mode"));
    p.chi = entries_matrix(j.at("entries"), dim * dim);
    return p;
}

json solver_json(const measures::SolverInfo &s, int iterations) {
    json j;
    j["status"] = sdp::to_string(s.status);
    j["iters"] = iterations;
    j["solves"] = s.solves;
    j["primal_residual"] = s.primal_residual;
    j["dual_residual"] = s.dual_residual;
    j["gap"] = s.gap;
    return j;
}

}  // namespace

std::string chi_to_json(const ProcessMatrix &p, const std::string &target) {
    return chi_json(p, target).dump(1) + "\n";
}

ProcessMatrix chi_from_json(const std::string &text) {
    return chi_from(parse(text, "chi-v1"));
}

std::string dataset_to_json(const tomo::Dataset &d) {
    json j;
    j["format"] = "sqpt-v1";
    j["n_qubits"] = d.n_qubits;
    j["shots"] = d.shots;
    j["exact"] = d.exact;
    json recs = json::array();
    for (const auto &r : d.records) {
        json e;
        e["prep"] = r.prep;
        e["input"] = r.input;
        e["meas"] = r.meas;
        e["counts"] = r.counts;
        e["lost"] = r.lost;
        recs.push_back(std::move(e));
    }
    j["records"] = std::move(recs);
    return j.dump(1) + "\n";
}

tomo::Dataset dataset_from_json(const std::string &text) {
    const json j = parse(text, "sqpt-v1");
    tomo::Dataset d;
    d.n_qubits = field<int>(j, "n_qubits");
    d.shots = field<long>(j, "shots");
    d.exact = j.value("exact", false);
    const int outcomes = 1 << d.n_qubits;
    for (const auto &e : j.at("records")) {
        tomo::Record r;
        r.prep = field<std::string>(e, "prep");
        r.input = e.value("input", 0);
        r.meas = field<std::string>(e, "meas");
        r.counts = field<std::vector<double>>(e, "counts");
        r.lost = e.value("lost", 0.0);
        if (static_cast<int>(r.prep.size()) != d.n_qubits || static_cast<int>(r.meas.size()) != d.n_qubits ||
            static_cast<int>(r.counts.size()) != outcomes || r.input < 0 || r.input >= outcomes) {
            throw FormatError("sqpt-v1: record does not match n_qubits");
        }
        d.records.push_back(std::move(r));
    }
    return d;
}

std::string tmat_to_json(const aoqpt::TransitionMatrix &t) {
    json j;
    j["format"] = "tmat-v1";
    j["k"] = t.k;
    j["setting"] = aoqpt::to_string(t.setting);
    json rows = json::array();
    for (int m = 0; m < t.k; ++m) {
        json row = json::array();
        for (int n = 0; n < t.k; ++n) {
            row.push_back(t.t(m, n));
        }
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j.dump(1) + "\n";
}

aoqpt::TransitionMatrix tmat_from_json(const std::string &text) {
    const json j = parse(text, "tmat-v1");
    aoqpt::TransitionMatrix t;
    t.k = field<int>(j, "k");
    t.setting = aoqpt::setting_from_string(field<std::string>(j, "setting"));
    const auto rows = field<std::vector<std::vector<double>>>(j, "rows");
    if (t.k < 1 || static_cast<int>(rows.size()) != t.k) {
        throw FormatError("tmat-v1: expected k rows");
    }
    t.t.resize(t.k, t.k);
    for (int m = 0; m < t.k; ++m) {
        if (static_cast<int>(rows[m].size()) != t.k) {
            throw FormatError("tmat-v1: expected k columns");
        }
        for (int n = 0; n < t.k; ++n) {
            t.t(m, n) = rows[m][n];
        }
    }
    return t;
}

std::string target_to_json(const channels::TargetOperation &t) {
    json j;
    j["format"] = "target-v1";
    j["name"] = t.name;
    j["dim"] = t.dim();
    j["kraus"] = matrix_entries(t.kraus);
    json init = json::array();
    for (const auto &v : t.initial) {
        init.push_back(matrix_entries(v.transpose()));
    }
    j["initial"] = std::move(init);
    j["fourier_factors"] = t.fourier_factors;
    return j.dump(1) + "\n";
}

channels::TargetOperation target_from_json(const std::string &text) {
    const json j = parse(text, "target-v1");
    const int dim = field<int>(j, "dim");
    if (dim < 1) {
        throw FormatError("target-v1: dim must be positive");
    }
    const CMatrix kraus = entries_matrix(j.at("kraus"), dim);
    std::vector<CVector> initial;
    for (const auto &e : j.at("initial")) {
        if (!e.is_array() || static_cast<int>(e.size()) != dim) {
            throw FormatError("target-v1: initial state must have dim entries");
        }
        CVector v(dim);
        for (int i = 0; i < dim; ++i) {
            if (!e[i].is_array() || e[i].size() != 2) {
                throw FormatError("target-v1: each entry must be [re, im]");
            }
            v(i) = cplx(e[i][0].get<double>(), e[i][1].get<double>());
        }
        initial.push_back(v);
    }
    return channels::make_target(field<std::string>(j, "name"), kraus, std::move(initial),
                                 field<std::vector<int>>(j, "fourier_factors"));
}

std::string measures_to_json(const MeasuresReport &r) {
    json j;
    j["format"] = "measures-v1";
    j["target"] = r.target;
    j["tp_mode"] = channels::to_string(r.tp_mode);
    json rows = json::array();
    for (const auto &row : r.rows) {
        json e;
        e["measure"] = measures::to_string(row.measure);
        e["lower"] = number(row.lower);
        e["upper"] = number(row.upper);
        e["direct"] = number(row.direct);
        e["solver"] = solver_json(row.solver, row.iterations);
        json ss;
        json trace = json::array();
        for (double v : row.seesaw_trace) {
            trace.push_back(number(v));
        }
        ss["trace"] = std::move(trace);
        ss["rejected_decrease"] = row.seesaw_rejected;
        e["seesaw"] = std::move(ss);
        json w = json::object();
        const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(
            std::max(row.chi_worst.rows(), row.chi_best.rows())))));
        for (const auto &[name, m] : {std::pair<const char *, const CMatrix *>{"chi_worst", &row.chi_worst},
                                      std::pair<const char *, const CMatrix *>{"chi_best", &row.chi_best}}) {
            if (m->size() > 0) {
                ProcessMatrix p{OperatorBasis::computational(d), *m, r.tp_mode};
                w[name] = chi_json(p, "");
            }
        }
        e["witnesses"] = std::move(w);
        rows.push_back(std::move(e));
    }
    j["results"] = std::move(rows);
    return j.dump(1) + "\n";
}

MeasuresReport measures_from_json(const std::string &text) {
    const json j = parse(text, "measures-v1");
    MeasuresReport r;
    r.target = field<std::string>(j, "target");
    r.tp_mode = channels::tp_mode_from_string(field<std::string>(j, "tp_mode"));
    for (const auto &e : j.at("results")) {
        MeasureRow row;
        row.measure = measures::measure_from_string(field<std::string>(e, "measure"));
        row.lower = number_or_nan(e, "lower");
        row.upper = number_or_nan(e, "upper");
        row.direct = number_or_nan(e, "direct");
        if (e.contains("solver")) {
            const auto &s = e.at("solver");
            row.iterations = s.value("iters", 0);
            row.solver.iterations = row.iterations;
            row.solver.solves = s.value("solves", 0);
            row.solver.status = sdp::status_from_string(s.value("status", "max_iter"));
            row.solver.primal_residual = s.value("primal_residual", 0.0);
            row.solver.dual_residual = s.value("dual_residual", 0.0);
            row.solver.gap = s.value("gap", 0.0);
        }
        if (e.contains("seesaw")) {
            for (const auto &v : e.at("seesaw").at("trace")) {
                row.seesaw_trace.push_back(v.is_null() ? measures::kNaN : v.get<double>());
            }
            row.seesaw_rejected = e.at("seesaw").value("rejected_decrease", 0.0);
        }
        if (e.contains("witnesses")) {
            const auto &w = e.at("witnesses");
            if (w.contains("chi_worst")) {
                row.chi_worst = chi_from(w.at("chi_worst")).chi;
            }
            if (w.contains("chi_best")) {
                row.chi_best = chi_from(w.at("chi_best")).chi;
            }
        }
        r.rows.push_back(std::move(row));
    }
    return r;
}

std::string measures_to_csv(const MeasuresReport &r) {
    auto fmt = [](double v) -> std::string {
        if (!std::isfinite(v)) {
            return "";
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.8f", v);
        return buf;
    };
    std::ostringstream out;
    out << "measure,lower,upper,direct,gap,solver_iters\n";
    for (const auto &row : r.rows) {
        out << measures::to_string(row.measure) << ',' << fmt(row.lower) << ',' << fmt(row.upper) << ','
            << fmt(row.direct) << ',' << fmt(row.upper - row.lower) << ',' << row.iterations << '\n';
    }
    return out.str();
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

}  // namespace qdyn::io
