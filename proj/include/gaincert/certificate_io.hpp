#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gaincert/matcore.hpp"
#include "gaincert/synth.hpp"
#include "gaincert/verify.hpp"

namespace gaincert {

// Parsed plant description: JSON object with keys "A" (array of arrays),
// "B" (array of arrays), optional "lambda", optional "tol".
struct PlantFile {
    Mat a;
    Mat b;
    std::optional<double> lambda;
    double tol = 1e-9;
};

// Parsed certificate document (the output of the synth command).
struct CertificateFile {
    Mat k;
    int l = 0;
    double m = 1;
    double m_total = 1;
    std::vector<double> ladder;
    Mat t;
    double t_norm = 1;
    double t_inv_norm = 1;
    double lambda = 1;
    Mat a;
    Mat b;
    double tol = 1e-9;
};

// All readers throw std::runtime_error with a description on I/O failure,
// malformed JSON, or schema violations.
PlantFile read_plant_file(const std::string& path);
CertificateFile read_certificate(const std::string& path);

// Certificate serialization: fixed key order, every number at 15
// significant digits, so output is reproducible byte for byte.
void write_certificate(const std::string& path, const GainCertificate& cert,
                       const Mat& plant_a, const Mat& plant_b, double lambda, double tol);

// CSV trace: header exactly "t,norm,envelope", one row per sample.
void write_trace_csv(const std::string& path, const std::vector<EnvelopeSample>& samples);

// %.15g rendering used for all serialized numbers.
std::string format_g15(double x);

}  // namespace gaincert
