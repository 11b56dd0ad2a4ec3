#include "stabsel/io.hpp"

#include "stabsel/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace stabsel {

namespace fs = std::filesystem;

namespace {

fs::path temp_sibling(const fs::path& target) {
    fs::path tmp = target;
    tmp += ".tmp";
    return tmp;
}

void remove_quietly(const fs::path& path) {
    std::error_code ec;
    fs::remove(path, ec);
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_files(const std::vector<std::pair<fs::path, std::string>>& files) {
    std::vector<fs::path> written;
    try {
        for (const auto& [path, content] : files) {
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            const fs::path tmp = temp_sibling(path);
            written.push_back(tmp);
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << content;
            out.close();
            if (!out) throw DataError("cannot write " + path.string());
        }
        for (std::size_t i = 0; i < files.size(); ++i) fs::rename(written[i], files[i].first);
    } catch (const fs::filesystem_error& e) {
        for (const auto& tmp : written) remove_quietly(tmp);
        throw DataError(std::string("cannot write output: ") + e.what());
    } catch (...) {
        for (const auto& tmp : written) remove_quietly(tmp);
        throw;
    }
}

void write_file(const fs::path& path, const std::string& content) { write_files({{path, content}}); }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string stability_svg(const FrequencyMatrix& freq, const StabilityResult& result,
                          const std::vector<std::string>& names) {
    if (names.size() != freq.p()) throw ConfigError("need one name per variable");
    const double W = 720, H = 440, left = 60, right = 20, top = 30, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;
    const Index G = freq.grid().size();
    // x runs along -log(lambda), so the path reads left to right as lambda shrinks
    const double l0 = std::log(freq.grid()[0]);
    const double l1 = std::log(freq.grid()[G - 1]);
    auto x_of = [&](Index g) { return G == 1 ? left + pw / 2 : left + pw * (l0 - std::log(freq.grid()[g])) / (l0 - l1); };
    auto y_of = [&](double pi) { return top + ph * (1.0 - pi); };

    std::ostringstream out;
    out.precision(6);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
        << ' ' << H << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    const double wx0 = x_of(result.window.first), wx1 = x_of(result.window.last);
    out << "<rect x=\"" << wx0 << "\" y=\"" << top << "\" width=\"" << std::max(1.0, wx1 - wx0) << "\" height=\"" << ph
        << "\" fill=\"#eef3fb\"/>\n"
        << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0})
        out << "<text x=\"" << left - 8 << "\" y=\"" << y_of(tick) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
            << tick << "</text>\n";
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12
        << "\" font-size=\"12\" text-anchor=\"middle\">lambda (decreasing, log scale)</text>\n"
        << "<text x=\"16\" y=\"" << top + ph / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << top + ph / 2 << ")\">selection frequency</text>\n";

    // unstable variables first so stable ones are drawn on top
    for (int pass = 0; pass < 2; ++pass) {
        for (Index k = 0; k < freq.p(); ++k) {
            const bool stable = result.stable_set.contains(k);
            if (stable != (pass == 1)) continue;
            out << "<path fill=\"none\" stroke=\"" << (stable ? "#c0392b" : "#9a9a9a") << "\" stroke-width=\""
                << (stable ? 2 : 1) << "\" d=\"";
            for (Index g = 0; g < G; ++g) out << (g == 0 ? 'M' : 'L') << x_of(g) << ' ' << y_of(freq.pi(k, g)) << ' ';
            if (G == 1) out << 'L' << x_of(0) + 1 << ' ' << y_of(freq.pi(k, 0));
            out << "\"><title>" << xml_escape(names[k]) << "</title></path>\n";
        }
    }
    out << "<line x1=\"" << left << "\" y1=\"" << y_of(result.pi_thr) << "\" x2=\"" << left + pw << "\" y2=\""
        << y_of(result.pi_thr) << "\" stroke=\"#2471a3\" stroke-dasharray=\"6 4\"/>\n"
        << "<text x=\"" << left + pw - 4 << "\" y=\"" << y_of(result.pi_thr) - 6
        << "\" font-size=\"11\" text-anchor=\"end\">pi_thr = " << result.pi_thr << "</text>\n"
        << "</svg>\n";
    return out.str();
}

std::string stable_set_tsv(const StabilityResult& result, const std::vector<std::string>& names) {
    if (names.size() != result.max_frequency.size()) throw ConfigError("need one name per variable");
    std::ostringstream out;
    out.precision(10);
    out << "variable\tmax_frequency\tstable\n";
    for (Index k = 0; k < names.size(); ++k)
        out << names[k] << '\t' << result.max_frequency[k] << '\t' << (result.stable_set.contains(k) ? 1 : 0) << '\n';
    return out.str();
}

}  // namespace stabsel
