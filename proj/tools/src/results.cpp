// SPDX-License-Identifier: Apache-2.0
#include "dmce/bench/results.hpp"

#include "dmce/common.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace dmce::bench {

namespace {

std::string fmt(const char* spec, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Shortest round-trip decimal form.
std::string num(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

double parse_double(const std::string& s, int line)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError("results CSV line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

long parse_long(const std::string& s, int line)
{
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError("results CSV line " + std::to_string(line) + ": bad integer '" + s + "'");
    }
    return v;
}

std::string xml_escape(const std::string& in)
{
    std::string out;
    for (char c : in) {
        switch (c) {
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '&':
            out += "&amp;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

} // namespace

void sort_rows(std::vector<ResultRow>& rows)
{
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.method, a.snr_db, a.alpha, a.bits) < std::tie(b.method, b.snr_db, b.alpha, b.bits);
    });
}

std::string format_csv(const std::vector<ResultRow>& rows)
{
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : rows) {
        out += r.method + "," + num(r.snr_db) + "," + num(r.alpha) + "," + std::to_string(r.bits) + "," +
               num(r.nmse_db) + "," + num(r.latency_ms) + "," + std::to_string(r.n) + "\n";
    }
    return out;
}

std::vector<ResultRow> parse_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<ResultRow> rows;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!header) {
            if (line != kCsvHeader) {
                throw FormatError("results CSV line " + std::to_string(lineno) + ": expected header '" +
                                  kCsvHeader + "'");
            }
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (f.size() != 7) {
            throw FormatError("results CSV line " + std::to_string(lineno) + ": expected 7 fields, got " +
                              std::to_string(f.size()));
        }
        if (f[0].empty()) {
            throw FormatError("results CSV line " + std::to_string(lineno) + ": empty method name");
        }
        ResultRow r;
        r.method = f[0];
        r.snr_db = parse_double(f[1], lineno);
        r.alpha = parse_double(f[2], lineno);
        r.bits = static_cast<int>(parse_long(f[3], lineno));
        r.nmse_db = parse_double(f[4], lineno);
        r.latency_ms = parse_double(f[5], lineno);
        r.n = parse_long(f[6], lineno);
        if (r.n < 1 || !std::isfinite(r.nmse_db)) {
            throw FormatError("results CSV line " + std::to_string(lineno) + ": n must be >= 1 and nmse finite");
        }
        rows.push_back(std::move(r));
    }
    if (!header) {
        throw FormatError("results CSV line 1: missing header");
    }
    return rows;
}

void write_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw IoError(path.string() + ": cannot open for writing");
    }
    os << format_csv(rows);
    if (!os) {
        throw IoError(path.string() + ": write failed");
    }
}

std::vector<ResultRow> read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path.string() + ": cannot open results CSV");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_csv(ss.str());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

double median_latency(std::vector<double> samples, std::size_t warmup)
{
    if (samples.empty()) {
        throw InvalidArgument("median_latency: no samples");
    }
    if (samples.size() > warmup) {
        samples.erase(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(warmup));
    }
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    return n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

std::vector<Chart> render_charts(const std::vector<ResultRow>& rows)
{
    if (rows.empty()) {
        throw InvalidArgument("plot: no result rows (empty method set)");
    }
    std::map<std::pair<double, int>, std::vector<const ResultRow*>> groups;
    for (const auto& r : rows) {
        groups[{r.alpha, r.bits}].push_back(&r);
    }
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

    std::vector<Chart> charts;
    for (const auto& [key, members] : groups) {
        const auto [alpha, bits] = key;
        double x0 = members.front()->snr_db, x1 = x0, y0 = members.front()->nmse_db, y1 = y0;
        std::map<std::string, std::vector<std::pair<double, double>>> lines;
        for (const auto* r : members) {
            x0 = std::min(x0, r->snr_db);
            x1 = std::max(x1, r->snr_db);
            y0 = std::min(y0, r->nmse_db);
            y1 = std::max(y1, r->nmse_db);
            lines[r->method].emplace_back(r->snr_db, r->nmse_db);
        }
        if (x1 == x0) {
            x0 -= 1.0;
            x1 += 1.0;
        }
        y0 = std::floor(y0 / 5.0) * 5.0;
        y1 = std::ceil(y1 / 5.0) * 5.0;
        if (y1 == y0) {
            y1 += 5.0;
        }
        const double w = 640, h = 420, left = 70, right = 170, top = 40, bottom = 60;
        const double pw = w - left - right, ph = h - top - bottom;
        auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
        auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

        std::ostringstream s;
        s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
          << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        s << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">NMSE vs SNR (alpha="
          << num(alpha) << ", " << (bits == 0 ? std::string("full resolution") : std::to_string(bits) + "-bit")
          << ")</text>\n";
        // Axes and grid.
        s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
          << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (double y = y0; y <= y1 + 1e-9; y += 5.0) {
            s << "<line x1=\"" << left << "\" y1=\"" << fmt("%.2f", py(y)) << "\" x2=\"" << left + pw << "\" y2=\""
              << fmt("%.2f", py(y)) << "\" stroke=\"#ddd\"/>\n";
            s << "<text x=\"" << left - 6 << "\" y=\"" << fmt("%.2f", py(y) + 4) << "\" text-anchor=\"end\">"
              << num(y) << "</text>\n";
        }
        std::set<double> xs;
        for (const auto* r : members) {
            xs.insert(r->snr_db);
        }
        for (double x : xs) {
            s << "<text x=\"" << fmt("%.2f", px(x)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
              << num(x) << "</text>\n";
        }
        s << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">SNR (dB)</text>\n";
        s << "<text transform=\"translate(18," << top + ph / 2
          << ") rotate(-90)\" text-anchor=\"middle\">NMSE (dB)</text>\n";
        int idx = 0;
        for (auto& [method, pts] : lines) {
            std::sort(pts.begin(), pts.end());
            const char* color = palette[idx % 7];
            s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                s << (i ? " " : "") << fmt("%.2f", px(pts[i].first)) << "," << fmt("%.2f", py(pts[i].second));
            }
            s << "\"/>\n";
            const double ly = top + 10 + 20 * idx;
            s << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40 << "\" y2=\""
              << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
            s << "<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\">" << xml_escape(method) << "</text>\n";
            ++idx;
        }
        s << "</svg>\n";
        charts.push_back({"nmse_alpha" + num(alpha) + "_bits" + std::to_string(bits) + ".svg", s.str()});
    }
    return charts;
}

} // namespace dmce::bench
