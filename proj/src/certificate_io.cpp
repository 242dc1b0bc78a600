#include "gaincert/certificate_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gaincert {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": JSON parse failure: " + e.what());
    }
    return j;
}

Mat matrix_field(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw std::runtime_error(path + ": missing key \"" + key + "\"");
    const json& arr = j.at(key);
    if (!arr.is_array() || arr.empty() || !arr[0].is_array())
        throw std::runtime_error(path + ": \"" + key + "\" must be a 2-D array");
    const size_t rows = arr.size();
    const size_t cols = arr[0].size();
    if (cols == 0) throw std::runtime_error(path + ": \"" + key + "\" has an empty row");
    Mat m(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        if (!arr[i].is_array() || arr[i].size() != cols)
            throw std::runtime_error(path + ": \"" + key + "\" is not rectangular");
        for (size_t c = 0; c < cols; ++c) {
            if (!arr[i][c].is_number())
                throw std::runtime_error(path + ": \"" + key + "\" has a non-numeric entry");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                arr[i][c].get<double>();
        }
    }
    if (!m.allFinite())
        throw std::runtime_error(path + ": \"" + key + "\" has a non-finite entry");
    return m;
}

double number_field(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw std::runtime_error(path + ": missing numeric key \"" + key + "\"");
    return j.at(key).get<double>();
}

void emit_matrix(std::ostream& os, const Mat& m, const char* indent) {
    os << "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) os << ",";
        os << "\n" << indent << "  [";
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) os << ", ";
            os << format_g15(m(i, c));
        }
        os << "]";
    }
    os << "\n" << indent << "]";
}

}  // namespace

std::string format_g15(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

PlantFile read_plant_file(const std::string& path) {
    const json j = load_json(path);
    PlantFile pf;
    pf.a = matrix_field(j, "A", path);
    pf.b = matrix_field(j, "B", path);
    if (pf.a.rows() != pf.a.cols()) throw std::runtime_error(path + ": \"A\" must be square");
    if (pf.b.rows() != pf.a.rows())
        throw std::runtime_error(path + ": \"B\" row count must match \"A\"");
    if (j.contains("lambda")) {
        if (!j.at("lambda").is_number())
            throw std::runtime_error(path + ": \"lambda\" must be a number");
        pf.lambda = j.at("lambda").get<double>();
    }
    if (j.contains("tol")) {
        if (!j.at("tol").is_number() || !(j.at("tol").get<double>() > 0))
            throw std::runtime_error(path + ": \"tol\" must be a positive number");
        pf.tol = j.at("tol").get<double>();
    }
    return pf;
}

CertificateFile read_certificate(const std::string& path) {
    const json j = load_json(path);
    CertificateFile cf;
    cf.k = matrix_field(j, "K", path);
    cf.l = static_cast<int>(number_field(j, "L", path));
    cf.m = number_field(j, "M", path);
    cf.m_total = number_field(j, "M_total", path);
    if (!j.contains("ladder") || !j.at("ladder").is_array())
        throw std::runtime_error(path + ": missing array key \"ladder\"");
    for (const auto& v : j.at("ladder")) {
        if (!v.is_number()) throw std::runtime_error(path + ": \"ladder\" has a non-numeric entry");
        cf.ladder.push_back(v.get<double>());
    }
    cf.t = matrix_field(j, "T", path);
    cf.t_norm = number_field(j, "T_norm", path);
    cf.t_inv_norm = number_field(j, "T_inv_norm", path);
    cf.lambda = number_field(j, "lambda", path);
    if (!j.contains("inputs") || !j.at("inputs").is_object())
        throw std::runtime_error(path + ": missing object key \"inputs\"");
    const json& in = j.at("inputs");
    cf.a = matrix_field(in, "A", path);
    cf.b = matrix_field(in, "B", path);
    cf.tol = number_field(in, "tol", path);
    if (cf.a.rows() != cf.a.cols() || cf.b.rows() != cf.a.rows() ||
        cf.k.rows() != cf.b.cols() || cf.k.cols() != cf.a.rows())
        throw std::runtime_error(path + ": inconsistent matrix dimensions");
    if (static_cast<Eigen::Index>(cf.ladder.size()) != cf.a.rows())
        throw std::runtime_error(path + ": ladder length must match the state dimension");
    return cf;
}

void write_certificate(const std::string& path, const GainCertificate& cert,
                       const Mat& plant_a, const Mat& plant_b, double lambda, double tol) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"K\": ";
    emit_matrix(os, cert.k_gain, "  ");
    os << ",\n";
    os << "  \"L\": " << cert.l_exponent << ",\n";
    os << "  \"M\": " << format_g15(cert.m_constant) << ",\n";
    os << "  \"M_total\": " << format_g15(cert.m_total) << ",\n";
    os << "  \"ladder\": [";
    for (size_t i = 0; i < cert.ladder.values.size(); ++i) {
        if (i) os << ", ";
        os << format_g15(cert.ladder.values[i]);
    }
    os << "],\n";
    os << "  \"T\": ";
    emit_matrix(os, cert.canonical.t, "  ");
    os << ",\n";
    os << "  \"T_norm\": " << format_g15(cert.transform_norms.first) << ",\n";
    os << "  \"T_inv_norm\": " << format_g15(cert.transform_norms.second) << ",\n";
    os << "  \"lambda\": " << format_g15(lambda) << ",\n";
    os << "  \"inputs\": {\n";
    os << "    \"A\": ";
    emit_matrix(os, plant_a, "    ");
    os << ",\n";
    os << "    \"B\": ";
    emit_matrix(os, plant_b, "    ");
    os << ",\n";
    os << "    \"lambda\": " << format_g15(lambda) << ",\n";
    os << "    \"tol\": " << format_g15(tol) << "\n";
    os << "  }\n";
    os << "}\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << os.str();
    if (!out) throw std::runtime_error("write failure on " + path);
}

void write_trace_csv(const std::string& path, const std::vector<EnvelopeSample>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "t,norm,envelope\n";
    for (const EnvelopeSample& s : samples)
        out << format_g15(s.t) << "," << format_g15(s.norm) << "," << format_g15(s.envelope)
            << "\n";
    if (!out) throw std::runtime_error("write failure on " + path);
}

}  // namespace gaincert
