#include "ftmloc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace ftmloc {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

struct LineReader {
    std::ifstream in;
    std::string path;
    int line_no = 0;

    explicit LineReader(const std::filesystem::path& p) : in(p), path(p.string()) {
        if (!in) throw ParseError(path + ": cannot open file");
    }

    std::string context() const { return path + ":" + std::to_string(line_no); }

    bool next(std::vector<std::string>& tokens) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            tokens.clear();
            std::istringstream ss(line);
            std::string tok;
            while (ss >> tok) tokens.push_back(tok);
            if (!tokens.empty()) return true;  // blank lines are not records
        }
        return false;
    }
};

[[noreturn]] void parse_fail(const LineReader& r, const std::string& what) {
    throw ParseError(r.context() + ": " + what);
}

double parse_double(const LineReader& r, const std::string& tok, const char* field) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || tok.empty())
        parse_fail(r, std::string("bad ") + field + " '" + tok + "'");
    if (!std::isfinite(v)) parse_fail(r, std::string(field) + " not finite");
    return v;
}

long long parse_int(const LineReader& r, const std::string& tok, const char* field) {
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size() || tok.empty())
        parse_fail(r, std::string("bad ") + field + " '" + tok + "'");
    return v;
}

void expect_version(LineReader& r, const char* tag) {
    std::vector<std::string> tokens;
    if (!r.next(tokens)) parse_fail(r, "empty file, expected version line");
    if (tokens.size() != 2 || tokens[0] != tag || tokens[1] != "v1")
        parse_fail(r, std::string("expected '") + tag + " v1' version line");
}

struct FileWriter {
    std::ofstream out;
    std::string path;

    explicit FileWriter(const std::filesystem::path& p) : out(p, std::ios::trunc), path(p.string()) {
        if (!out) throw Error(path + ": cannot open for writing");
    }
    ~FileWriter() = default;

    void line(const std::string& s) { out << s << '\n'; }
    void finish() {
        out.flush();
        if (!out) throw Error(path + ": write failed");
    }
};

}  // namespace

Scene load_scene(const std::filesystem::path& path) {
    LineReader r(path);
    expect_version(r, "ftmloc-scene");

    Scene scene;
    std::vector<std::string> tokens;
    if (!r.next(tokens) || tokens.size() != 3 || tokens[0] != "area")
        parse_fail(r, "expected 'area <width> <height>'");
    scene.width = parse_double(r, tokens[1], "width");
    scene.height = parse_double(r, tokens[2], "height");
    if (!(scene.width > 0.0) || !(scene.height > 0.0))
        throw ValidationError(r.context() + ": area dimensions must be positive");

    std::set<std::string> seen;
    while (r.next(tokens)) {
        if (tokens[0] != "ap" || (tokens.size() != 3 && tokens.size() != 5))
            parse_fail(r, "expected 'ap <id> <anchor|unknown> [<x> <y>]'");
        ApNode ap;
        ap.id = tokens[1];
        if (tokens[2] == "anchor")
            ap.kind = ApKind::Anchor;
        else if (tokens[2] == "unknown")
            ap.kind = ApKind::Unknown;
        else
            parse_fail(r, "AP kind must be 'anchor' or 'unknown'");
        if (tokens.size() == 5)
            ap.coords = Vec2(parse_double(r, tokens[3], "x"), parse_double(r, tokens[4], "y"));

        if (!seen.insert(ap.id).second)
            throw ValidationError(r.context() + ": duplicate AP id '" + ap.id + "'");
        if (ap.kind == ApKind::Anchor && !ap.coords)
            throw ValidationError(r.context() + ": anchor '" + ap.id + "' requires coordinates");
        if (ap.coords && (ap.coords->x() < 0.0 || ap.coords->x() > scene.width ||
                          ap.coords->y() < 0.0 || ap.coords->y() > scene.height))
            throw ValidationError(r.context() + ": AP '" + ap.id + "' outside the area");
        scene.aps.push_back(std::move(ap));
    }
    return scene;
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
    FileWriter w(path);
    w.line("ftmloc-scene v1");
    w.line("area " + fmt_double(scene.width) + " " + fmt_double(scene.height));
    for (const ApNode& ap : scene.aps) {
        std::string line = "ap " + ap.id + (ap.kind == ApKind::Anchor ? " anchor" : " unknown");
        if (ap.coords)
            line += " " + fmt_double(ap.coords->x()) + " " + fmt_double(ap.coords->y());
        w.line(line);
    }
    w.finish();
}

std::vector<DeviceTrack> load_ranging_log(const std::filesystem::path& path) {
    LineReader r(path);
    expect_version(r, "ftmloc-rlog");

    std::vector<std::string> tokens;
    if (!r.next(tokens) || tokens.size() != 2 || tokens[0] != "interval_ms")
        parse_fail(r, "expected 'interval_ms <milliseconds>'");
    const long long interval_ms = parse_int(r, tokens[1], "interval_ms");
    if (interval_ms <= 0) throw ValidationError(r.context() + ": interval_ms must be positive");
    const double dt = static_cast<double>(interval_ms) / 1000.0;

    struct Builder {
        DeviceTrack track;
        bool started = false;
    };
    std::map<std::string, Builder> devices;

    while (r.next(tokens)) {
        if (tokens.size() != 5)
            parse_fail(r, "expected '<device> <step> <ap> <distance_mm> <stddev_mm>'");
        const std::string& dev = tokens[0];
        const long long step = parse_int(r, tokens[1], "step");
        const std::string& ap = tokens[2];
        const long long d_mm = parse_int(r, tokens[3], "distance_mm");
        const long long s_mm = parse_int(r, tokens[4], "stddev_mm");
        if (s_mm < 0) parse_fail(r, "stddev_mm must be unsigned");

        Builder& b = devices[dev];
        if (!b.started) {
            b.track.device_id = dev;
            b.track.dt = dt;
            b.track.snapshots.push_back({static_cast<int>(step), {}});
            b.started = true;
        } else {
            const int last = b.track.snapshots.back().step;
            if (step < last)
                throw NonMonotonicSteps(r.context() + ": device '" + dev + "' step " +
                                        std::to_string(step) + " after step " +
                                        std::to_string(last));
            // Missing intermediate steps become empty snapshots so step
            // indices always advance by exactly 1.
            for (int s = last + 1; s <= static_cast<int>(step); ++s)
                b.track.snapshots.push_back({s, {}});
        }
        RangingSnapshot& snap = b.track.snapshots.back();
        for (const RangingPair& p : snap.pairs)
            if (p.ap_id == ap)
                throw DuplicateMeasurement(r.context() + ": duplicate measurement for device '" +
                                           dev + "' step " + std::to_string(step) + " AP '" + ap +
                                           "'");
        snap.pairs.push_back(
            {ap, static_cast<double>(d_mm) / 1000.0, static_cast<double>(s_mm) / 1000.0});
    }

    std::vector<DeviceTrack> tracks;
    tracks.reserve(devices.size());
    for (auto& [_, b] : devices) {
        for (RangingSnapshot& snap : b.track.snapshots)
            std::sort(snap.pairs.begin(), snap.pairs.end(),
                      [](const RangingPair& a, const RangingPair& c) { return a.ap_id < c.ap_id; });
        tracks.push_back(std::move(b.track));
    }
    return tracks;
}

void save_ranging_log(const std::vector<DeviceTrack>& tracks, const std::filesystem::path& path) {
    if (tracks.empty()) throw ValidationError("no tracks to save");
    const double dt = tracks.front().dt;
    for (const DeviceTrack& t : tracks)
        if (t.dt != dt)
            throw ValidationError("tracks with differing dt cannot share one ranging log");

    std::vector<const DeviceTrack*> ordered;
    for (const DeviceTrack& t : tracks) ordered.push_back(&t);
    std::sort(ordered.begin(), ordered.end(),
              [](const DeviceTrack* a, const DeviceTrack* b) { return a->device_id < b->device_id; });

    FileWriter w(path);
    w.line("ftmloc-rlog v1");
    w.line("interval_ms " + std::to_string(std::llround(dt * 1000.0)));
    for (const DeviceTrack* t : ordered)
        for (const RangingSnapshot& snap : t->snapshots)
            for (const RangingPair& p : snap.pairs)
                w.line(t->device_id + " " + std::to_string(snap.step) + " " + p.ap_id + " " +
                       std::to_string(std::llround(p.d_ftm * 1000.0)) + " " +
                       std::to_string(std::llround(p.s_ftm * 1000.0)));
    w.finish();
}

ParamSet load_params(const std::filesystem::path& path) {
    LineReader r(path);
    expect_version(r, "ftmloc-params");

    ParamSet params;
    std::vector<std::string> tokens;
    while (r.next(tokens)) {
        if (tokens[0] == "ap") {
            if (tokens.size() != 4) parse_fail(r, "expected 'ap <id> <x> <y>'");
            if (params.unknown_coords.count(tokens[1]))
                parse_fail(r, "duplicate ap entry '" + tokens[1] + "'");
            params.unknown_coords[tokens[1]] =
                Vec2(parse_double(r, tokens[2], "x"), parse_double(r, tokens[3], "y"));
        } else if (tokens[0] == "dev") {
            if (tokens.size() < 3) parse_fail(r, "expected 'dev <id> <c0> [c1 ...]'");
            if (params.calib.count(tokens[1]))
                parse_fail(r, "duplicate dev entry '" + tokens[1] + "'");
            Eigen::VectorXd coeffs(tokens.size() - 2);
            for (std::size_t i = 2; i < tokens.size(); ++i)
                coeffs[static_cast<Eigen::Index>(i - 2)] =
                    parse_double(r, tokens[i], "coefficient");
            params.calib[tokens[1]] = CalibrationPoly(std::move(coeffs));
        } else {
            parse_fail(r, "expected 'ap' or 'dev' record");
        }
    }
    if (params.calib.empty())
        throw ParseError(path.string() + ": missing device section (no 'dev' records)");
    return params;
}

void save_params(const ParamSet& params, const std::filesystem::path& path) {
    FileWriter w(path);
    w.line("ftmloc-params v1");
    for (const auto& [id, p] : params.unknown_coords)
        w.line("ap " + id + " " + fmt_double(p.x()) + " " + fmt_double(p.y()));
    for (const auto& [id, poly] : params.calib) {
        std::string line = "dev " + id;
        for (Eigen::Index i = 0; i < poly.coeffs.size(); ++i)
            line += " " + fmt_double(poly.coeffs[i]);
        w.line(line);
    }
    w.finish();
}

PointSeries load_tracks(const std::filesystem::path& path) {
    LineReader r(path);
    expect_version(r, "ftmloc-track");

    PointSeries series;
    std::vector<std::string> tokens;
    while (r.next(tokens)) {
        if (tokens.size() != 4) parse_fail(r, "expected '<device> <step> <x> <y>'");
        const long long step = parse_int(r, tokens[1], "step");
        auto& list = series[tokens[0]];
        list.emplace_back(static_cast<int>(step), Vec2(parse_double(r, tokens[2], "x"),
                                                       parse_double(r, tokens[3], "y")));
    }
    for (auto& [dev, list] : series) {
        std::sort(list.begin(), list.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < list.size(); ++i)
            if (list[i].first == list[i - 1].first)
                throw ParseError(path.string() + ": duplicate step " +
                                 std::to_string(list[i].first) + " for device '" + dev + "'");
    }
    return series;
}

void save_tracks(const PointSeries& series, const std::filesystem::path& path) {
    FileWriter w(path);
    w.line("ftmloc-track v1");
    for (const auto& [dev, list] : series)
        for (const auto& [step, p] : list)
            w.line(dev + " " + std::to_string(step) + " " + fmt_double(p.x()) + " " +
                   fmt_double(p.y()));
    w.finish();
}

std::string format_report(const TrainReport& report) {
    std::string out = "ftmloc-report v1\n";
    out += "initial_cost " + fmt_double(report.initial_cost) + "\n";
    out += "best " + std::to_string(report.best_iteration) + " " + fmt_double(report.best_cost) +
           "\n";
    for (const auto& row : report.minibatch_costs)
        out += "mb " + std::to_string(row.iteration) + " " + row.device_id + " " +
               fmt_double(row.cost) + "\n";
    for (const auto& row : report.evaluations)
        out += "eval " + std::to_string(row.iteration) + " " + fmt_double(row.full_cost) + " " +
               fmt_double(row.best_cost) + "\n";
    for (const auto& row : report.coeff_trace) {
        out += "coeff " + std::to_string(row.iteration) + " " + row.device_id;
        for (Eigen::Index i = 0; i < row.coeffs.size(); ++i)
            out += " " + fmt_double(row.coeffs[i]);
        out += "\n";
    }
    for (const auto& row : report.coord_trace)
        out += "coord " + std::to_string(row.iteration) + " " + row.ap_id + " " +
               fmt_double(row.coords.x()) + " " + fmt_double(row.coords.y()) + "\n";
    return out;
}

void save_report(const TrainReport& report, const std::filesystem::path& path) {
    FileWriter w(path);
    w.out << format_report(report);
    w.finish();
}

}  // namespace ftmloc
