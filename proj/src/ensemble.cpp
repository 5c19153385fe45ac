#include "polaron/ensemble.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "polaron/errors.hpp"

namespace polaron {

DressedSample draw_dressed_sample(Rng& rng, double alpha, const SamplerLimits& limits) {
    const Excursion exc = sample_excursion(rng, alpha, limits);
    const auto displacements = sample_displacements(rng, exc);

    std::vector<double> norms(exc.n());
    for (std::size_t i = 0; i < exc.n(); ++i) {
        const auto& x = displacements[i];
        norms[i] = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    }
    const USample us = sample_u(rng, norms);

    DressedSample row;
    row.tau = exc.tau;
    row.sigma2 = sigma_squared({exc, us.u, norms});
    row.logw = alpha * exc.tau + us.log_weight;
    row.n = static_cast<std::uint32_t>(exc.n());

    if (!(row.sigma2 > 0.0) || row.sigma2 > row.tau + 1e-10 || !std::isfinite(row.logw))
        throw std::logic_error("draw_dressed_sample: invariant breach in sampled row");
    return row;
}

Ensemble generate_ensemble(double alpha, std::size_t shards, std::size_t samples_per_shard,
                           std::uint64_t base_seed, const SamplerLimits& limits) {
    if (!(alpha > 0.0)) throw std::invalid_argument("generate_ensemble: alpha must be > 0");
    if (shards == 0) throw std::invalid_argument("generate_ensemble: shards must be > 0");
    if (samples_per_shard == 0)
        throw std::invalid_argument("generate_ensemble: samples_per_shard must be > 0");

    Ensemble ens;
    ens.meta = {1, alpha, base_seed, shards, samples_per_shard};
    ens.rows.resize(shards * samples_per_shard);

    bool failed = false;
    GenerationError first_error("", 0, 0);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < shards; ++k) {
        Rng rng(shard_seed(base_seed, k));
        for (std::size_t i = 0; i < samples_per_shard; ++i) {
            try {
                ens.rows[k * samples_per_shard + i] = draw_dressed_sample(rng, alpha, limits);
            } catch (const ResourceLimitError& e) {
#pragma omp critical
                {
                    if (!failed || k < first_error.shard() ||
                        (k == first_error.shard() && i < first_error.draw())) {
                        first_error = GenerationError(
                            std::string("generate_ensemble: ") + e.what() + " at shard " +
                                std::to_string(k) + ", draw " + std::to_string(i),
                            k, i);
                        failed = true;
                    }
                }
                break;
            }
        }
    }
    if (failed) throw first_error;
    return ens;
}

std::uint64_t fnv1a64(std::span<const char> bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

double parse_double(std::string_view s, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw EnsembleLoadError("malformed float field '" + std::string(s) + "'", line);
    return v;
}

std::uint64_t parse_u64(std::string_view s, std::size_t line) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw EnsembleLoadError("malformed integer field '" + std::string(s) + "'", line);
    return v;
}

std::string_view header_field(std::string_view header, std::string_view key, std::size_t line) {
    const std::string tag = std::string(key) + ":";
    std::size_t pos = 0;
    while (pos < header.size()) {
        const std::size_t end = std::min(header.find(' ', pos), header.size());
        const std::string_view tok = header.substr(pos, end - pos);
        if (tok.starts_with(tag)) return tok.substr(tag.size());
        pos = end + 1;
    }
    throw EnsembleLoadError("missing header field '" + std::string(key) + "'", line);
}

}  // namespace

void save_ensemble(const Ensemble& ensemble, const std::filesystem::path& path) {
    std::string out;
    out.reserve(64 * ensemble.size() + 256);

    out += "version:" + std::to_string(ensemble.meta.version);
    out += " alpha:";
    append_double(out, ensemble.meta.alpha);
    out += " base_seed:" + std::to_string(ensemble.meta.base_seed);
    out += " shards:" + std::to_string(ensemble.meta.shards);
    out += " samples_per_shard:" + std::to_string(ensemble.meta.samples_per_shard);
    out += " count:" + std::to_string(ensemble.size());
    out += '\n';

    for (const auto& row : ensemble.rows) {
        append_double(out, row.tau);
        out += ',';
        append_double(out, row.sigma2);
        out += ',';
        append_double(out, row.logw);
        out += ',';
        out += std::to_string(row.n);
        out += '\n';
    }

    char buf[32];
    std::snprintf(buf, sizeof(buf), "checksum:%016llx",
                  static_cast<unsigned long long>(fnv1a64(out)));
    out += buf;
    out += '\n';

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_ensemble: cannot open " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("save_ensemble: write failed for " + path.string());
}

Ensemble load_ensemble(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw EnsembleLoadError("cannot open " + path.string(), 0);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string data = ss.str();

    Ensemble ens;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    std::size_t checksummed_bytes = 0;
    bool saw_checksum = false;
    std::size_t expected_count = 0;

    while (pos < data.size()) {
        std::size_t eol = data.find('\n', pos);
        if (eol == std::string::npos) eol = data.size();
        const std::string_view line(data.data() + pos, eol - pos);
        ++line_no;

        if (line_no == 1) {
            const auto version = parse_u64(header_field(line, "version", 1), 1);
            if (version != 1)
                throw EnsembleLoadError("unsupported format version " + std::to_string(version), 1);
            ens.meta.version = 1;
            ens.meta.alpha = parse_double(header_field(line, "alpha", 1), 1);
            ens.meta.base_seed = parse_u64(header_field(line, "base_seed", 1), 1);
            ens.meta.shards = parse_u64(header_field(line, "shards", 1), 1);
            ens.meta.samples_per_shard = parse_u64(header_field(line, "samples_per_shard", 1), 1);
            expected_count = parse_u64(header_field(line, "count", 1), 1);
            ens.rows.reserve(expected_count);
        } else if (line.starts_with("checksum:")) {
            const std::uint64_t stated = [&] {
                std::uint64_t v = 0;
                const std::string_view hex = line.substr(9);
                const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
                if (ec != std::errc() || ptr != hex.data() + hex.size())
                    throw EnsembleLoadError("malformed checksum", line_no);
                return v;
            }();
            const std::uint64_t actual =
                fnv1a64(std::span<const char>(data.data(), checksummed_bytes));
            if (stated != actual) throw EnsembleLoadError("checksum mismatch", line_no);
            saw_checksum = true;
            pos = eol + 1;
            continue;
        } else {
            if (saw_checksum) throw EnsembleLoadError("data after checksum line", line_no);
            DressedSample row;
            std::size_t field_start = 0;
            std::string_view fields[4];
            int nf = 0;
            for (std::size_t i = 0; i <= line.size(); ++i) {
                if (i == line.size() || line[i] == ',') {
                    if (nf >= 4) throw EnsembleLoadError("too many fields in row", line_no);
                    fields[nf++] = line.substr(field_start, i - field_start);
                    field_start = i + 1;
                }
            }
            if (nf != 4) throw EnsembleLoadError("expected 4 fields in row", line_no);
            row.tau = parse_double(fields[0], line_no);
            row.sigma2 = parse_double(fields[1], line_no);
            row.logw = parse_double(fields[2], line_no);
            row.n = static_cast<std::uint32_t>(parse_u64(fields[3], line_no));
            ens.rows.push_back(row);
        }

        pos = eol + 1;
        checksummed_bytes = std::min(pos, data.size());
    }

    if (line_no == 0) throw EnsembleLoadError("empty file", 0);
    if (!saw_checksum)
        throw EnsembleLoadError("missing checksum line (file truncated after row " +
                                    std::to_string(ens.rows.size()) + ")",
                                line_no);
    if (ens.rows.size() != expected_count)
        throw EnsembleLoadError("row count mismatch: header says " +
                                    std::to_string(expected_count) + ", found " +
                                    std::to_string(ens.rows.size()) + " (row " +
                                    std::to_string(ens.rows.size()) + ")",
                                line_no);
    return ens;
}

EssReport effective_sample_size(const Ensemble& ensemble, double P, double lambda) {
    if (ensemble.rows.empty())
        throw std::invalid_argument("effective_sample_size: empty ensemble");

    const double p2h = 0.5 * P * P;
    double shift = -std::numeric_limits<double>::infinity();
    for (const auto& r : ensemble.rows)
        shift = std::max(shift, r.logw - p2h * r.sigma2 + lambda * r.tau);

    double sw = 0.0;
    double sw2 = 0.0;
    for (const auto& r : ensemble.rows) {
        const double w = std::exp(r.logw - p2h * r.sigma2 + lambda * r.tau - shift);
        sw += w;
        sw2 += w * w;
    }
    if (!(sw > 0.0)) throw DiagnosticError("effective_sample_size: all weights underflowed");
    return {sw * sw / sw2, 1.0 / sw};
}

}  // namespace polaron
