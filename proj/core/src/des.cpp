#include "dpusim/des.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>
#include <sstream>
#include <tuple>

#include "dpusim/errors.hpp"
#include "dpusim/latency.hpp"

namespace dpusim {

const char* to_string(TraceKind k) {
    switch (k) {
        case TraceKind::Produce: return "produce";
        case TraceKind::Drop: return "drop";
        case TraceKind::Dequeue: return "dequeue";
        case TraceKind::EnqueueResource: return "enqueue_resource";
        case TraceKind::StartService: return "start_service";
        case TraceKind::EndService: return "end_service";
        case TraceKind::Complete: return "complete";
    }
    return "?";
}

std::optional<TraceKind> trace_kind_from_string(const std::string& s) {
    static const std::pair<const char*, TraceKind> table[] = {
        {"produce", TraceKind::Produce},
        {"drop", TraceKind::Drop},
        {"dequeue", TraceKind::Dequeue},
        {"enqueue_resource", TraceKind::EnqueueResource},
        {"start_service", TraceKind::StartService},
        {"end_service", TraceKind::EndService},
        {"complete", TraceKind::Complete},
    };
    for (const auto& [name, kind] : table)
        if (s == name) return kind;
    return std::nullopt;
}

double MetricsReport::busy_total(const std::string& resource) const {
    double sum = 0.0;
    for (const auto& [key, v] : busy_fraction)
        if (key.first == resource) sum += v;
    return sum;
}

double MetricsReport::occupancy_total(const std::string& resource) const {
    double sum = 0.0;
    for (const auto& [key, v] : occupancy_fraction)
        if (key.first == resource) sum += v;
    return sum;
}

namespace {

/// Mean-preserving lognormal multiplier. Box-Muller on a seeded mt19937_64
/// keeps the draw sequence under our control, so identical seeds give
/// identical traces. No draw happens at cv = 0.
class JitterSource {
public:
    JitterSource(uint64_t seed, double cv) : rng_(seed), cv_(cv) {
        if (cv_ > 0.0) {
            const double s2 = std::log1p(cv_ * cv_);
            sigma_ = std::sqrt(s2);
            mu_ = -0.5 * s2;
        }
    }

    double draw() {
        if (cv_ == 0.0) return 1.0;
        const double u1 = 1.0 - std::ldexp(static_cast<double>(rng_() >> 11), -53);
        const double u2 = std::ldexp(static_cast<double>(rng_() >> 11), -53);
        const double z =
            std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
        return std::exp(mu_ + sigma_ * z);
    }

private:
    std::mt19937_64 rng_;
    double cv_;
    double sigma_ = 0.0;
    double mu_ = 0.0;
};

struct HeapEv {
    double t;
    uint64_t seq;
    int type;     // 0 = camera produce, 1 = service end
    int worker;
};

struct HeapCmp {
    bool operator()(const HeapEv& a, const HeapEv& b) const {
        return std::tie(a.t, a.seq) > std::tie(b.t, b.seq);
    }
};

struct Req {
    double t;
    int worker;
};

struct ResState {
    int servers = 1;
    int free = 1;
    std::vector<Req> queue;   // sorted by (t, worker): FIFO, worker-id tie-break

    void enqueue(Req r) {
        auto pos = std::upper_bound(queue.begin(), queue.end(), r,
                                    [](const Req& a, const Req& b) {
                                        return std::tie(a.t, a.worker) <
                                               std::tie(b.t, b.worker);
                                    });
        queue.insert(pos, r);
    }
};

struct WState {
    int64_t frame = -1;
    int stage = -1;
};

struct StageInfo {
    Resource res;
    double base_ms;
    std::string name;
    std::string task;
};

std::string format_tail(const std::vector<TraceEvent>& events, size_t n) {
    std::ostringstream os;
    const size_t start = events.size() > n ? events.size() - n : 0;
    os << "last " << (events.size() - start) << " trace events:\n";
    for (size_t i = start; i < events.size(); ++i) {
        const auto& e = events[i];
        os << "  t=" << e.t_ms << " worker=" << e.worker_id << " frame=" << e.frame_id
           << " stage=" << (e.stage.empty() ? "-" : e.stage) << " " << to_string(e.kind)
           << "\n";
    }
    return os.str();
}

} // namespace

Trace make_trace(std::vector<TraceEvent> events, const ValidatedScenario& scenario,
                 double window_t0_ms, double window_t1_ms) {
    Trace t;
    t.events = std::move(events);
    t.cpu_servers = scenario->host.effective_servers();
    for (const auto& s : scenario->pipeline.stages)
        t.stage_task[s.name] = s.resource == Resource::Dpu ? s.task_ref : s.name;
    t.window_t0_ms = window_t0_ms;
    t.window_t1_ms = window_t1_ms;
    return t;
}

SimResult simulate(const ValidatedScenario& scenario, const ParamSet& params,
                   const SimLimits& limits) {
    const ScenarioConfig& cfg = scenario.config();
    const FrameDemands dem = frame_demands(cfg.pipeline, params, cfg.accelerator);

    std::vector<StageInfo> stages;
    stages.reserve(dem.stages.size());
    for (const auto& d : dem.stages)
        stages.push_back({d.resource, d.duration_ms, d.stage, d.task});

    const int n_workers = cfg.threading.workers;
    const double interval = params.camera_interval_ms;
    const size_t queue_depth = static_cast<size_t>(cfg.threading.frame_queue_depth);
    const int64_t target = static_cast<int64_t>(cfg.sim.warmup_frames) + cfg.sim.frames;
    const uint64_t max_events =
        limits.max_events > 0
            ? limits.max_events
            : 64ull * static_cast<uint64_t>(target) * (stages.size() + 2) + 65536;

    ResState cpu{cfg.host.effective_servers(), cfg.host.effective_servers(), {}};
    ResState dpu{1, 1, {}};
    auto res_for = [&](Resource r) -> ResState& {
        return r == Resource::Cpu ? cpu : dpu;
    };

    std::vector<WState> workers(n_workers);
    std::deque<int64_t> frame_queue;
    std::vector<Req> frame_waiters;   // sorted (t, worker)
    std::priority_queue<HeapEv, std::vector<HeapEv>, HeapCmp> heap;
    JitterSource jitter(cfg.sim.seed, cfg.sim.jitter_cv);

    Trace trace = make_trace({}, scenario);
    trace.events.reserve(static_cast<size_t>(target) * (stages.size() * 3 + 4) + 16);

    uint64_t seq = 0;
    uint64_t processed = 0;
    int64_t next_frame = 0;
    int64_t completed = 0;
    double window_t0 = 0.0;
    double end_t = 0.0;
    bool done = false;

    auto log_ev = [&](double t, int w, int64_t f, int stage_idx, TraceKind k) {
        TraceEvent e;
        e.t_ms = t;
        e.worker_id = w;
        e.frame_id = f;
        if (stage_idx >= 0) {
            e.stage = stages[stage_idx].name;
            e.resource = to_string(stages[stage_idx].res);
        }
        e.kind = k;
        trace.events.push_back(std::move(e));
    };

    auto request_stage = [&](int w, double t) {
        const WState& ws = workers[w];
        log_ev(t, w, ws.frame, ws.stage, TraceKind::EnqueueResource);
        res_for(stages[ws.stage].res).enqueue({t, w});
    };

    auto start_frame = [&](int w, double t, int64_t frame) {
        workers[w].frame = frame;
        workers[w].stage = 0;
        log_ev(t, w, frame, -1, TraceKind::Dequeue);
        request_stage(w, t);
    };

    auto request_frame = [&](int w, double t) {
        if (interval == 0.0) {
            const int64_t id = next_frame++;
            log_ev(t, -1, id, -1, TraceKind::Produce);
            start_frame(w, t, id);
        } else if (!frame_queue.empty()) {
            const int64_t id = frame_queue.front();
            frame_queue.pop_front();
            start_frame(w, t, id);
        } else {
            Req r{t, w};
            auto pos = std::upper_bound(frame_waiters.begin(), frame_waiters.end(), r,
                                        [](const Req& a, const Req& b) {
                                            return std::tie(a.t, a.worker) <
                                                   std::tie(b.t, b.worker);
                                        });
            frame_waiters.insert(pos, r);
        }
    };

    auto handle_produce = [&](double t) {
        const int64_t id = next_frame++;
        log_ev(t, -1, id, -1, TraceKind::Produce);
        if (!frame_waiters.empty()) {
            const int w = frame_waiters.front().worker;
            frame_waiters.erase(frame_waiters.begin());
            start_frame(w, t, id);
        } else {
            frame_queue.push_back(id);
            if (frame_queue.size() > queue_depth) {
                log_ev(t, -1, frame_queue.front(), -1, TraceKind::Drop);
                frame_queue.pop_front();
            }
        }
        heap.push({t + interval, seq++, 0, -1});
    };

    auto handle_end = [&](double t, int w) {
        WState& ws = workers[w];
        log_ev(t, w, ws.frame, ws.stage, TraceKind::EndService);
        res_for(stages[ws.stage].res).free++;
        if (ws.stage + 1 < static_cast<int>(stages.size())) {
            ws.stage++;
            request_stage(w, t);
            return;
        }
        log_ev(t, w, ws.frame, -1, TraceKind::Complete);
        completed++;
        if (completed == cfg.sim.warmup_frames) window_t0 = t;
        if (completed == target) {
            done = true;
            end_t = t;
            return;
        }
        ws.frame = -1;
        ws.stage = -1;
        request_frame(w, t);
    };

    auto resolve_grants = [&](double t) {
        for (ResState* r : {&cpu, &dpu}) {
            while (r->free > 0 && !r->queue.empty()) {
                const Req rq = r->queue.front();
                r->queue.erase(r->queue.begin());
                const WState& ws = workers[rq.worker];
                const double dur = stages[ws.stage].base_ms * jitter.draw();
                log_ev(t, rq.worker, ws.frame, ws.stage, TraceKind::StartService);
                r->free--;
                heap.push({t + dur, seq++, 1, rq.worker});
            }
        }
    };

    if (interval > 0.0) heap.push({interval, seq++, 0, -1});
    for (int w = 0; w < n_workers; ++w) request_frame(w, 0.0);
    resolve_grants(0.0);

    while (!done) {
        if (heap.empty())
            throw SimError("simulation stalled with no pending events",
                           format_tail(trace.events, 100));
        const double t = heap.top().t;
        do {
            while (!done && !heap.empty() && heap.top().t == t) {
                const HeapEv ev = heap.top();
                heap.pop();
                if (++processed > max_events)
                    throw SimError("event budget exceeded (" +
                                       std::to_string(max_events) +
                                       " events) before reaching " +
                                       std::to_string(target) + " completions",
                                   format_tail(trace.events, 100));
                if (ev.type == 0)
                    handle_produce(t);
                else
                    handle_end(t, ev.worker);
            }
            if (done) break;
            resolve_grants(t);
        } while (!heap.empty() && heap.top().t == t);
    }

    if (!(end_t > window_t0))
        throw SimError("empty measurement window; all measured completions at t=" +
                           std::to_string(end_t),
                       format_tail(trace.events, 100));

    trace.window_t0_ms = window_t0;
    trace.window_t1_ms = end_t;
    MetricsReport metrics = metrics_from_trace(trace, window_t0, end_t);
    return SimResult{std::move(metrics), std::move(trace)};
}

MetricsReport metrics_from_trace(const Trace& trace, double t0_ms, double t1_ms) {
    if (!(t1_ms > t0_ms)) throw SimError("metrics window is empty");
    const double window = t1_ms - t0_ms;

    auto clip = [&](double a, double b) {
        return std::max(0.0, std::min(b, t1_ms) - std::max(a, t0_ms));
    };
    auto in_window = [&](double t) { return t > t0_ms && t <= t1_ms; };

    struct OpenStage {
        double enq = 0.0;
        double start = 0.0;
    };
    std::map<int, OpenStage> open;             // one open stage per worker
    std::map<int64_t, double> dequeue_at;
    MetricsReport m;
    m.window_ms = window;

    std::vector<double> latencies;
    double area = 0.0;
    double cursor = 0.0;
    int in_flight = 0;

    for (const auto& e : trace.events) {
        switch (e.kind) {
            case TraceKind::Dequeue:
                area += in_flight * clip(cursor, e.t_ms);
                cursor = e.t_ms;
                in_flight++;
                dequeue_at[e.frame_id] = e.t_ms;
                break;
            case TraceKind::Complete: {
                area += in_flight * clip(cursor, e.t_ms);
                cursor = e.t_ms;
                in_flight--;
                if (in_window(e.t_ms)) {
                    m.completed++;
                    auto it = dequeue_at.find(e.frame_id);
                    if (it != dequeue_at.end()) latencies.push_back(e.t_ms - it->second);
                }
                break;
            }
            case TraceKind::Drop:
                if (in_window(e.t_ms)) m.dropped++;
                break;
            case TraceKind::EnqueueResource:
                open[e.worker_id].enq = e.t_ms;
                break;
            case TraceKind::StartService:
                open[e.worker_id].start = e.t_ms;
                break;
            case TraceKind::EndService: {
                auto it = open.find(e.worker_id);
                if (it == open.end()) break;
                auto task_it = trace.stage_task.find(e.stage);
                const std::string& task =
                    task_it != trace.stage_task.end() ? task_it->second : e.stage;
                const std::pair<std::string, std::string> key{e.resource, task};
                m.busy_fraction[key] += clip(it->second.start, e.t_ms);
                m.occupancy_fraction[key] += clip(it->second.enq, e.t_ms);
                open.erase(it);
                break;
            }
            default:
                break;
        }
    }
    area += in_flight * clip(cursor, t1_ms);

    for (auto& [key, v] : m.busy_fraction) {
        const double servers = key.first == "cpu" ? trace.cpu_servers : 1.0;
        v /= window * servers;
    }
    for (auto& [key, v] : m.occupancy_fraction) v /= window;

    m.throughput_fps = static_cast<double>(m.completed) / (window / 1000.0);
    m.mean_in_flight = area / window;
    if (!latencies.empty()) {
        double sum = 0.0;
        for (double l : latencies) sum += l;
        m.mean_latency_ms = sum / static_cast<double>(latencies.size());
        std::sort(latencies.begin(), latencies.end());
        const size_t rank = static_cast<size_t>(
            std::ceil(0.95 * static_cast<double>(latencies.size())));
        m.p95_latency_ms = latencies[rank == 0 ? 0 : rank - 1];
    }
    return m;
}

std::vector<std::string> validate_trace(const Trace& trace,
                                        const ValidatedScenario& scenario) {
    std::vector<std::string> violations;
    auto bad = [&violations](const std::string& msg) { violations.push_back(msg); };

    const auto& stages = scenario->pipeline.stages;
    std::map<std::string, size_t> stage_index;
    for (size_t i = 0; i < stages.size(); ++i) stage_index[stages[i].name] = i;

    // (d) nondecreasing timestamps
    for (size_t i = 1; i < trace.events.size(); ++i) {
        if (trace.events[i].t_ms < trace.events[i - 1].t_ms - 1e-9) {
            bad("timestamps decrease at event " + std::to_string(i));
            break;
        }
    }

    // Per-frame bookkeeping and per-(frame,stage) ordering.
    struct FrameState {
        bool produced = false, completed = false, dropped = false;
        size_t next_stage = 0;
        double enq = -1.0, start = -1.0;
        bool stage_open = false;
        std::string open_stage;
    };
    std::map<int64_t, FrameState> frames;

    struct Interval {
        double start, end;
        int64_t frame;
        std::string stage;
    };
    std::map<std::string, std::vector<Interval>> per_resource;

    for (const auto& e : trace.events) {
        FrameState& f = frames[e.frame_id];
        switch (e.kind) {
            case TraceKind::Produce:
                if (f.produced) bad("frame " + std::to_string(e.frame_id) + " produced twice");
                f.produced = true;
                break;
            case TraceKind::Drop:
                if (f.dropped) bad("frame " + std::to_string(e.frame_id) + " dropped twice");
                f.dropped = true;
                break;
            case TraceKind::Dequeue:
                if (!f.produced)
                    bad("frame " + std::to_string(e.frame_id) + " dequeued before produce");
                break;
            case TraceKind::EnqueueResource: {
                auto it = stage_index.find(e.stage);
                if (it == stage_index.end()) {
                    bad("frame " + std::to_string(e.frame_id) + " enters unknown stage '" +
                        e.stage + "'");
                    break;
                }
                if (it->second != f.next_stage)
                    bad("frame " + std::to_string(e.frame_id) + " runs stage '" + e.stage +
                        "' out of pipeline order");
                f.next_stage = it->second + 1;
                f.enq = e.t_ms;
                f.stage_open = true;
                f.open_stage = e.stage;
                break;
            }
            case TraceKind::StartService:
                if (!f.stage_open || f.open_stage != e.stage || e.t_ms < f.enq - 1e-9)
                    bad("frame " + std::to_string(e.frame_id) + " stage '" + e.stage +
                        "' starts service without a preceding enqueue");
                f.start = e.t_ms;
                break;
            case TraceKind::EndService:
                if (!f.stage_open || f.open_stage != e.stage || e.t_ms < f.start - 1e-9) {
                    bad("frame " + std::to_string(e.frame_id) + " stage '" + e.stage +
                        "' ends service without a matching start");
                } else {
                    per_resource[e.resource].push_back(
                        {f.start, e.t_ms, e.frame_id, e.stage});
                }
                f.stage_open = false;
                break;
            case TraceKind::Complete:
                if (f.completed)
                    bad("frame " + std::to_string(e.frame_id) + " completed twice");
                if (f.next_stage != stages.size())
                    bad("frame " + std::to_string(e.frame_id) +
                        " completed before finishing the pipeline");
                f.completed = true;
                break;
        }
    }

    // (b) conservation: produced = completed + dropped + in-flight
    int64_t produced = 0, completed = 0, dropped = 0;
    for (const auto& [id, f] : frames) {
        if (f.produced) produced++;
        if (f.completed) completed++;
        if (f.dropped) dropped++;
        if (f.completed && f.dropped)
            bad("frame " + std::to_string(id) + " both completed and dropped");
        if ((f.completed || f.dropped || f.next_stage > 0) && !f.produced)
            bad("frame " + std::to_string(id) + " progressed without a produce event");
        // A frame that finished every stage is not in flight; without a
        // complete event it would silently vanish from the conservation count.
        if (!f.completed && !f.dropped && !f.stage_open &&
            f.next_stage == stages.size() && !stages.empty())
            bad("frame " + std::to_string(id) +
                " ran the full pipeline but never completed");
    }
    const int64_t in_flight = produced - completed - dropped;
    if (in_flight < 0)
        bad("frame conservation violated: produced " + std::to_string(produced) +
            " < completed " + std::to_string(completed) + " + dropped " +
            std::to_string(dropped));

    // (a) capacity: at most `servers` overlapping service intervals per resource
    for (auto& [resource, intervals] : per_resource) {
        const int capacity =
            resource == "cpu" ? scenario->host.effective_servers() : 1;
        struct Edge {
            double t;
            int delta;
            size_t idx;
        };
        std::vector<Edge> edges;
        for (size_t i = 0; i < intervals.size(); ++i) {
            if (intervals[i].end - intervals[i].start <= 1e-12) continue;
            edges.push_back({intervals[i].start, +1, i});
            edges.push_back({intervals[i].end, -1, i});
        }
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.t, a.delta) < std::tie(b.t, b.delta);   // ends before starts
        });
        int count = 0;
        std::vector<size_t> active;
        bool reported = false;
        for (const auto& e : edges) {
            if (e.delta > 0) {
                count++;
                active.push_back(e.idx);
                if (count > capacity && !reported) {
                    const auto& a = intervals[active[0]];
                    const auto& b = intervals[e.idx];
                    bad("resource '" + resource + "' over capacity (" +
                        std::to_string(capacity) + "): frame " + std::to_string(a.frame) +
                        " stage '" + a.stage + "' overlaps frame " + std::to_string(b.frame) +
                        " stage '" + b.stage + "'");
                    reported = true;
                }
            } else {
                count--;
                active.erase(std::find(active.begin(), active.end(), e.idx));
            }
        }
    }

    return violations;
}

} // namespace dpusim
