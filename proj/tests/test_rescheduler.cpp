#include "rail/rescheduler.hpp"

#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace rail;

namespace {

Station st(StationId id, const std::string& code, int platforms = 2) {
  return {id, code, platforms, false};
}

TrackSegment tk(TrackId id, StationId a, StationId b, Minutes journey,
                TrackRole role = TrackRole::General) {
  return {id, a, b, role, journey};
}

ScheduleEntry entry(TrainId train, StationId station, Minutes arr, Minutes dep,
                    TrackId via = 0) {
  ScheduleEntry e;
  e.train = train;
  e.station = station;
  e.planned_arrival = arr;
  e.planned_departure = dep;
  e.actual_arrival = arr;
  e.actual_departure = dep;
  e.track_from_prev = via;
  return e;
}

Fleet fleet_of(std::vector<Train> ts) { return Fleet::of(ts); }

DisasterEvent block_station(const RailwayNetwork& net, StationId s, Minutes t,
                            Minutes tau1, Minutes tau2) {
  DisasterEvent ev;
  ev.onset = t;
  for (PlatformIndex k = 1; k <= net.station(s).platform_count; ++k)
    ev.blocked_platforms.insert({s, k});
  ev.recovery = {tau1, tau2, RecoveryDensity::Uniform};
  return ev;
}

}  // namespace

TEST_CASE("sample_recovery") {
  SUBCASE("degenerate interval is forced") {
    RecoveryModel m{20, 20, RecoveryDensity::Uniform};
    CHECK(sample_recovery(m, 1) == 20);
    CHECK(sample_recovery(m, 999) == 20);
  }
  SUBCASE("deterministic per seed") {
    RecoveryModel m{10, 50, RecoveryDensity::Uniform};
    CHECK(sample_recovery(m, 42) == sample_recovery(m, 42));
  }
  SUBCASE("empirical mean near the midpoint") {
    RecoveryModel m{10, 50, RecoveryDensity::Uniform};
    long long sum = 0;
    for (int s = 0; s < 10000; ++s) {
      Minutes v = sample_recovery(m, s);
      CHECK(v >= 10);
      CHECK(v <= 50);
      sum += v;
    }
    double mean = double(sum) / 10000.0;
    CHECK(mean > 28.0);
    CHECK(mean < 32.0);
  }
  SUBCASE("bad interval") {
    CHECK_THROWS_AS(sample_recovery({50, 10, RecoveryDensity::Uniform}, 1),
                    Error);
  }
}

TEST_CASE("buffer_time") {
  DisasterEvent ev;
  ev.onset = 360;
  SUBCASE("uniform midpoint") {
    ev.recovery = {10, 50, RecoveryDensity::Uniform};
    CHECK(buffer_time(ev) == 390);
  }
  SUBCASE("degenerate") {
    ev.recovery = {20, 20, RecoveryDensity::Uniform};
    CHECK(buffer_time(ev) == 380);
  }
  SUBCASE("always inside the cited bounds") {
    std::mt19937 rng(5);
    for (int i = 0; i < 200; ++i) {
      Minutes a = rng() % 60;
      Minutes b = a + rng() % 60;
      ev.recovery = {a, b, RecoveryDensity::Uniform};
      Minutes buf = buffer_time(ev);
      CHECK(buf >= ev.onset + a);
      CHECK(buf <= ev.onset + b);
    }
  }
}

TEST_CASE("minimize_station_delay") {
  ScheduleEntry e = entry(1, 1, 600, 610);
  SUBCASE("dwell absorbs the delay") {
    auto r = minimize_station_delay(e, 6, 2);
    CHECK(r.actual_arrival == 606);
    CHECK(r.actual_departure == 610);
    CHECK(r.actual_dwell() == 4);
  }
  SUBCASE("zero delay is the identity") {
    auto r = minimize_station_delay(e, 0, 2);
    CHECK(r.actual_arrival == 600);
    CHECK(r.actual_departure == 610);
  }
  SUBCASE("floor forces a late departure") {
    auto r = minimize_station_delay(e, 15, 2);
    CHECK(r.actual_arrival == 615);
    CHECK(r.actual_departure == 617);
    CHECK(r.actual_dwell() == 2);
  }
  SUBCASE("dwell never grows and never undercuts the floor") {
    std::mt19937 rng(11);
    for (int i = 0; i < 300; ++i) {
      Minutes dwell = rng() % 12;
      ScheduleEntry x = entry(1, 1, 600, 600 + dwell);
      Minutes delay = rng() % 30;
      Minutes floor = rng() % 5;
      auto r = minimize_station_delay(x, delay, floor);
      CHECK(r.actual_dwell() <= x.planned_dwell());
      CHECK(r.actual_dwell() >= std::min<Minutes>(floor, x.planned_dwell()));
      CHECK(r.actual_arrival == x.planned_arrival + delay);
      CHECK(r.actual_departure >= x.planned_departure);
    }
  }
}

TEST_CASE("minimize_track_delay keeps running times exact") {
  auto net = build_network({st(1, "A"), st(2, "B"), st(3, "C")},
                           {tk(1, 1, 2, 30), tk(2, 2, 3, 20)});
  SUBCASE("on-time run") {
    std::vector<ScheduleEntry> legs{entry(1, 1, 590, 600),
                                    entry(1, 2, 630, 630, 1)};
    auto r = minimize_track_delay(net, legs);
    CHECK(r[1].actual_arrival == 630);
  }
  SUBCASE("held ten minutes, journey unchanged") {
    std::vector<ScheduleEntry> legs{entry(1, 1, 590, 600),
                                    entry(1, 2, 630, 640, 1)};
    legs[0].actual_departure = 610;
    auto r = minimize_track_delay(net, legs);
    CHECK(r[1].actual_arrival == 640);
  }
  SUBCASE("rerouted path sums journeys") {
    std::vector<ScheduleEntry> legs{entry(1, 1, 590, 600),
                                    entry(1, 2, 630, 630, 1),
                                    entry(1, 3, 650, 650, 2)};
    auto r = minimize_track_delay(net, legs);
    CHECK(r[2].actual_arrival - r[0].actual_departure == 50);
  }
}

TEST_CASE("total_delay") {
  auto net = build_network({st(1, "A"), st(2, "B")}, {tk(1, 1, 2, 30)});
  Timetable orig{entry(1, 1, 590, 600), entry(1, 2, 630, 635),
                 entry(2, 1, 640, 650), entry(2, 2, 680, 685)};
  SUBCASE("unchanged schedule totals zero") {
    auto r = total_delay(net, orig, orig);
    CHECK(r.total == 0);
  }
  SUBCASE("15 + 9 = 24") {
    Timetable res = orig;
    res[1].actual_arrival = 645;  // +15
    res[1].actual_departure = 650;
    res[3].actual_arrival = 689;  // +9
    res[3].actual_departure = 694;
    auto r = total_delay(net, orig, res);
    CHECK(r.total == 24);
    CHECK(r.per_train[1] == 15);
    CHECK(r.per_train[2] == 9);
  }
  SUBCASE("mismatched train sets throw") {
    Timetable res{entry(1, 1, 590, 600), entry(1, 2, 630, 635)};
    CHECK_THROWS_AS(total_delay(net, orig, res), Error);
  }
  SUBCASE("matches an independent per-entry diff on random results") {
    std::mt19937 rng(17);
    for (int i = 0; i < 100; ++i) {
      Timetable res = orig;
      for (auto& e : res) {
        Minutes d = rng() % 20;
        e.actual_arrival += d;
        e.actual_departure += d + rng() % 5;
      }
      auto r = total_delay(net, orig, res);
      Minutes expect = 0;
      for (TrainId t : {1, 2}) {
        auto oi = itinerary_of(orig, t);
        auto ri = itinerary_of(res, t);
        expect += ri.back()->actual_arrival - oi.back()->planned_arrival;
      }
      CHECK(r.total == expect);
      for (TrainId t : {1, 2}) {
        CHECK(r.per_train[t] ==
              r.station_component[t] + r.track_component[t]);
      }
    }
  }
}

namespace {

// Fixture: A -(t1)- B with a bypass B -(t3)- X -(t4)- C and direct
// B -(t2)- C. Premium train 1 runs A->B->C.
struct Case1Fixture {
  RailwayNetwork net = build_network(
      {st(1, "A"), st(2, "B"), st(3, "C"), st(4, "X")},
      {tk(1, 1, 2, 30), tk(2, 2, 3, 20), tk(3, 2, 4, 15), tk(4, 4, 3, 15)});
  Fleet fleet = fleet_of({{1, "12301", TrainCategory::Premium},
                          {2, "53061", TrainCategory::Local}});
  Timetable tt{entry(1, 1, 570, 580), entry(1, 2, 610, 615, 1),
               entry(1, 3, 635, 640, 2)};
  CaseContext ctx;

  Case1Fixture() {
    ctx.fleet = fleet;
    ctx.policy = PriorityPolicy::defaults();
    ctx.config = ProjectionConfig{};
    ctx.recovery_time = 40;
    ctx.buffer = 630;  // onset 600 + midpoint 30
  }
};

}  // namespace

TEST_CASE("handle_case1") {
  Case1Fixture f;
  // onset at 600: train 1 is on track t1 (departed 580, arrives 610).
  OccupancyState occ = occupancy_at(f.net, f.tt, 600);

  SUBCASE("alternative route free -> reroute (1.1.1)") {
    DisasterEvent ev;
    ev.onset = 600;
    ev.blocked_platforms.insert({2, 2});  // platform 1 of B stays usable
    ev.blocked_tracks.insert(2);          // direct B-C out for a while
    ev.recovery = {40, 40, RecoveryDensity::Uniform};
    auto d = handle_case1(f.net, f.tt, occ, ev, 1, f.ctx);
    CHECK(d.kind == DecisionKind::Reroute);
    CHECK(d.case_label == CaseLabel::C1_1_1);
    REQUIRE(d.new_route.has_value());
    CHECK(d.new_route->stations == std::vector<StationId>{2, 4, 3});
  }
  SUBCASE("no alternative -> hold at station, delta = t_R - o_DT (1.1.2)") {
    RailwayNetwork line = build_network(
        {st(1, "A"), st(2, "B"), st(3, "C")},
        {tk(1, 1, 2, 30), tk(2, 2, 3, 20)});
    Timetable tt{entry(1, 1, 570, 580), entry(1, 2, 610, 610, 1),
                 entry(1, 3, 630, 635, 2)};
    OccupancyState o = occupancy_at(line, tt, 600);
    DisasterEvent ev;
    ev.onset = 600;
    ev.blocked_platforms.insert({2, 2});
    ev.blocked_tracks.insert(2);
    ev.recovery = {40, 40, RecoveryDensity::Uniform};
    CaseContext ctx = f.ctx;
    auto d = handle_case1(line, tt, o, ev, 1, ctx);
    CHECK(d.kind == DecisionKind::Retime);
    CHECK(d.case_label == CaseLabel::C1_1_2);
    CHECK(d.added_delay == 30);  // t_R 640 - o_DT 610
  }
  SUBCASE("no free platform -> hold on track (1.2)") {
    DisasterEvent ev = block_station(f.net, 2, 600, 40, 40);
    auto d = handle_case1(f.net, f.tt, occ, ev, 1, f.ctx);
    CHECK(d.kind == DecisionKind::Retime);
    CHECK(d.case_label == CaseLabel::C1_2);
    CHECK(d.added_delay == 30);  // platforms reopen at 640, o_AT 610
  }
  SUBCASE("train not on approach") {
    DisasterEvent ev = block_station(f.net, 2, 600, 40, 40);
    CHECK_THROWS_AS(handle_case1(f.net, f.tt, occ, ev, 2, f.ctx), Error);
  }
}

TEST_CASE("handle_case2 reorders departures by priority") {
  auto net = build_network({st(1, "A", 4), st(2, "B", 2)}, {tk(1, 1, 2, 30)});
  Fleet fleet = fleet_of({{1, "12301", TrainCategory::Premium},
                          {2, "12303", TrainCategory::Mail},
                          {3, "13051", TrainCategory::Passenger}});
  CaseContext ctx;
  ctx.fleet = fleet;
  ctx.policy = PriorityPolicy::defaults();
  ctx.config = ProjectionConfig{};
  ctx.recovery_time = 30;

  SUBCASE("normal hours: premium, mail, passenger") {
    // dwelling at A (platforms), departures 730/732/734, onset 720
    Timetable tt{entry(1, 1, 700, 730), entry(1, 2, 760, 765, 1),
                 entry(2, 1, 702, 732), entry(2, 2, 770, 775, 1),
                 entry(3, 1, 704, 734), entry(3, 2, 780, 785, 1)};
    for (size_t i = 0; i < tt.size(); i += 2) tt[i].platform = int(i / 2) + 1;
    DisasterEvent ev;
    ev.onset = 720;
    ev.blocked_platforms.insert({1, 4});
    ev.recovery = {30, 30, RecoveryDensity::Uniform};
    ctx.buffer = buffer_time(ev);  // 750
    OccupancyState occ = occupancy_at(net, tt, 720);
    auto ds = handle_case2(net, tt, occ, ev, 1, ctx);
    REQUIRE(ds.size() == 3);
    // sorted by train id; positions reflect priority
    CHECK(ds[0].train == 1);
    CHECK(ds[0].departure_position == 0);
    CHECK(ds[0].added_delay == 0);
    CHECK(ds[1].train == 2);
    CHECK(ds[1].departure_position == 1);
    CHECK(ds[2].train == 3);
    CHECK(ds[2].departure_position == 2);
    for (const auto& d : ds) CHECK(d.kind == DecisionKind::Reorder);
  }
  SUBCASE("busy hours: premium, passenger, mail") {
    Timetable tt{entry(1, 1, 580, 600), entry(1, 2, 630, 635, 1),
                 entry(2, 1, 582, 602), entry(2, 2, 640, 645, 1),
                 entry(3, 1, 584, 604), entry(3, 2, 650, 655, 1)};
    for (size_t i = 0; i < tt.size(); i += 2) tt[i].platform = int(i / 2) + 1;
    DisasterEvent ev;
    ev.onset = 595;
    ev.blocked_platforms.insert({1, 4});
    ev.recovery = {30, 30, RecoveryDensity::Uniform};
    ctx.buffer = buffer_time(ev);
    OccupancyState occ = occupancy_at(net, tt, 595);
    auto ds = handle_case2(net, tt, occ, ev, 1, ctx);
    REQUIRE(ds.size() == 3);
    CHECK(ds[0].departure_position == 0);  // premium
    CHECK(ds[1].departure_position == 2);  // mail pushed behind passenger
    CHECK(ds[2].departure_position == 1);  // passenger second
  }
  SUBCASE("single waiting train keeps its slot") {
    Timetable tt{entry(1, 1, 700, 730), entry(1, 2, 760, 765, 1)};
    tt[0].platform = 1;
    DisasterEvent ev;
    ev.onset = 720;
    ev.blocked_platforms.insert({1, 4});
    ev.recovery = {30, 30, RecoveryDensity::Uniform};
    ctx.buffer = buffer_time(ev);
    OccupancyState occ = occupancy_at(net, tt, 720);
    auto ds = handle_case2(net, tt, occ, ev, 1, ctx);
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].added_delay == 0);
    CHECK(ds[0].departure_position == 0);
  }
  SUBCASE("precondition: station must have a blocked platform") {
    Timetable tt{entry(1, 1, 700, 730), entry(1, 2, 760, 765, 1)};
    DisasterEvent ev;
    ev.onset = 720;
    ev.blocked_platforms.insert({2, 1});
    ev.recovery = {30, 30, RecoveryDensity::Uniform};
    ctx.buffer = buffer_time(ev);
    OccupancyState occ = occupancy_at(net, tt, 720);
    CHECK_THROWS_AS(handle_case2(net, tt, occ, ev, 1, ctx), Error);
  }
}

TEST_CASE("handle_case3") {
  // A and B joined by two parallel tracks; B to C direct.
  auto net = build_network(
      {st(1, "A", 3), st(2, "B", 2), st(3, "C", 2)},
      {tk(1, 1, 2, 20, TrackRole::Up), tk(2, 1, 2, 20, TrackRole::Down),
       tk(3, 2, 3, 20, TrackRole::General)});
  Fleet fleet = fleet_of({{1, "12313", TrainCategory::Premium},
                          {2, "63525", TrainCategory::Local}});
  CaseContext ctx;
  ctx.fleet = fleet;
  ctx.policy = PriorityPolicy::defaults();
  ctx.config = ProjectionConfig{};
  ctx.recovery_time = 30;

  SUBCASE("platform and track free, top priority -> unchanged (3.1)") {
    Timetable tt{entry(1, 1, 690, 710), entry(1, 2, 730, 735, 1),
                 entry(1, 3, 755, 760, 3)};
    tt[0].platform = 1;
    DisasterEvent ev;
    ev.onset = 700;
    ev.blocked_platforms.insert({2, 2});  // platform 1 of B remains
    ev.recovery = {30, 30, RecoveryDensity::Uniform};
    ctx.buffer = buffer_time(ev);  // 730
    OccupancyState occ = occupancy_at(net, tt, 700);
    auto d = handle_case3(net, tt, occ, ev, 1, ctx);
    CHECK(d.kind == DecisionKind::NoChange);
    CHECK(d.case_label == CaseLabel::C3_1);
  }
  SUBCASE("blocked planned track, parallel free, top priority -> new track (3.2)") {
    Timetable tt{entry(1, 1, 690, 710), entry(1, 2, 730, 735, 1),
                 entry(1, 3, 755, 760, 3)};
    DisasterEvent ev;
    ev.onset = 700;
    ev.blocked_tracks.insert(1);  // the planned UP track
    ev.recovery = {30, 30, RecoveryDensity::Uniform};
    ctx.buffer = buffer_time(ev);
    OccupancyState occ = occupancy_at(net, tt, 700);
    auto d = handle_case3(net, tt, occ, ev, 1, ctx);
    CHECK(d.kind == DecisionKind::Reroute);
    CHECK(d.case_label == CaseLabel::C3_2);
    REQUIRE(d.new_route.has_value());
    REQUIRE(!d.new_route->tracks.empty());
    CHECK(d.new_route->tracks[0] == 2);
  }
  SUBCASE("blocked planned track, alternative occupied -> wait (3.2)") {
    Timetable tt{entry(1, 1, 690, 710), entry(1, 2, 730, 735, 1),
                 entry(1, 3, 755, 760, 3),
                 // the local rides track 2 through the window
                 entry(2, 1, 680, 705), entry(2, 2, 725, 726, 2)};
    DisasterEvent ev;
    ev.onset = 700;
    ev.blocked_tracks.insert(1);
    ev.recovery = {30, 30, RecoveryDensity::Uniform};
    ctx.buffer = buffer_time(ev);
    OccupancyState occ = occupancy_at(net, tt, 700);
    auto d = handle_case3(net, tt, occ, ev, 1, ctx);
    CHECK(d.kind == DecisionKind::Retime);
    CHECK(d.case_label == CaseLabel::C3_2);
    CHECK(d.added_delay > 0);
  }
  SUBCASE("precondition rejects a train already at the blocked station") {
    Timetable tt{entry(1, 2, 690, 710), entry(1, 3, 730, 735, 3)};
    tt[0].platform = 1;
    DisasterEvent ev;
    ev.onset = 700;
    ev.blocked_platforms.insert({2, 1});
    ev.recovery = {30, 30, RecoveryDensity::Uniform};
    ctx.buffer = buffer_time(ev);
    OccupancyState occ = occupancy_at(net, tt, 700);
    CHECK_THROWS_AS(handle_case3(net, tt, occ, ev, 1, ctx), Error);
  }
}

namespace {

// Independent optimum for single-line instances: trains serialize at the
// block; try every service order, move each train as early as possible,
// and keep the cheapest feasible completion.
struct LineInstance {
  RailwayNetwork net;
  Fleet fleet;
  Timetable tt;
  DisasterEvent event;
  ProjectionConfig config;
};

// Minute-stepped replay under one fixed precedence order. Resource
// semantics mirror the system under test: a platform is held from grant
// until the train enters the outbound track, the track is held until the
// next platform grant, entries onto a track keep the headway, and dwell
// at a stop compresses down to the configured floor. Returns -1 when the
// replay stalls.
Minutes replay_with_precedence(const LineInstance& inst,
                               const std::vector<TrainId>& order) {
  Minutes recovery_end = inst.event.onset + inst.event.recovery.min_minutes;
  enum class Ph { NotSpawned, AtPlatform, OnTrack, Done };
  struct St {
    Ph phase = Ph::NotSpawned;
    size_t step = 0;
    int platform = 0;
    TrackId track = 0;
    Minutes dep_target = 0;
    Minutes phys_arrival = 0;
    Minutes terminal_arrival = -1;
  };
  std::map<TrainId, St> st;
  std::map<TrainId, std::vector<const ScheduleEntry*>> itin;
  Minutes t_end = 0;
  for (TrainId id : order) {
    itin[id] = itinerary_of(inst.tt, id);
    st[id] = St{};
    t_end = std::max(t_end, itin[id].back()->planned_arrival);
  }
  std::map<std::pair<StationId, int>, TrainId> platform_holder;
  std::map<TrackId, TrainId> track_holder;
  std::map<TrackId, Minutes> last_entry;

  auto platform_usable = [&](StationId s, int k, Minutes t) {
    if (inst.event.blocked_platforms.count({s, k}) && t >= inst.event.onset &&
        t < recovery_end)
      return false;
    auto it = platform_holder.find({s, k});
    return it == platform_holder.end() || it->second == 0;
  };
  auto track_usable = [&](TrackId l, Minutes t) {
    if (inst.event.blocked_tracks.count(l) && t >= inst.event.onset &&
        t < recovery_end)
      return false;
    auto it = track_holder.find(l);
    if (it != track_holder.end() && it->second != 0) return false;
    auto le = last_entry.find(l);
    return le == last_entry.end() || t >= le->second + inst.config.headway;
  };

  for (Minutes t = 0; t <= t_end + 100000; ++t) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (TrainId id : order) {
        auto& s = st[id];
        const auto& ents = itin[id];
        if (s.phase == Ph::NotSpawned &&
            t >= ents[0]->planned_arrival) {
          const Station& stn = inst.net.station(ents[0]->station);
          for (int k = 1; k <= stn.platform_count; ++k) {
            if (platform_usable(stn.id, k, t)) {
              platform_holder[{stn.id, k}] = id;
              s.phase = Ph::AtPlatform;
              s.platform = k;
              Minutes floor = ents[0]->planned_dwell() > 0
                                  ? std::min<Minutes>(inst.config.min_dwell,
                                                      ents[0]->planned_dwell())
                                  : 0;
              s.dep_target = std::max(ents[0]->planned_departure, t + floor);
              moved = true;
              break;
            }
          }
        } else if (s.phase == Ph::AtPlatform && t >= s.dep_target) {
          if (s.step + 1 >= ents.size()) {
            s.terminal_arrival =
                s.terminal_arrival < 0 ? t : s.terminal_arrival;
            platform_holder[{ents[s.step]->station, s.platform}] = 0;
            s.phase = Ph::Done;
            moved = true;
            continue;
          }
          TrackId l = inst.net
                          .tracks_between(ents[s.step]->station,
                                          ents[s.step + 1]->station)
                          .front();
          if (track_usable(l, t)) {
            platform_holder[{ents[s.step]->station, s.platform}] = 0;
            track_holder[l] = id;
            last_entry[l] = t;
            s.phase = Ph::OnTrack;
            s.track = l;
            s.phys_arrival = t + inst.net.track(l).journey_time;
            moved = true;
          }
        } else if (s.phase == Ph::OnTrack &&
                   t >= std::max(s.phys_arrival,
                                 ents[s.step + 1]->planned_arrival)) {
          const Station& stn = inst.net.station(ents[s.step + 1]->station);
          for (int k = 1; k <= stn.platform_count; ++k) {
            if (platform_usable(stn.id, k, t)) {
              track_holder[s.track] = 0;
              s.track = 0;
              platform_holder[{stn.id, k}] = id;
              s.phase = Ph::AtPlatform;
              s.platform = k;
              s.step += 1;
              if (s.step + 1 >= ents.size()) {
                s.terminal_arrival = t;
                // dwell out, then vanish
                s.dep_target = std::max(ents[s.step]->planned_departure, t);
              } else {
                Minutes floor =
                    ents[s.step]->planned_dwell() > 0
                        ? std::min<Minutes>(inst.config.min_dwell,
                                            ents[s.step]->planned_dwell())
                        : 0;
                s.dep_target =
                    std::max(ents[s.step]->planned_departure, t + floor);
              }
              moved = true;
              break;
            }
          }
        }
      }
    }
    bool all_done = true;
    for (const auto& [id, s] : st)
      if (s.terminal_arrival < 0) all_done = false;
    if (all_done) {
      Minutes total = 0;
      for (const auto& [id, s] : st)
        total += s.terminal_arrival - itin[id].back()->planned_arrival;
      return total;
    }
  }
  return -1;
}

Minutes exhaustive_optimum(const LineInstance& inst) {
  std::set<TrainId> trains;
  for (const auto& e : inst.tt) trains.insert(e.train);
  std::vector<TrainId> order(trains.begin(), trains.end());
  std::sort(order.begin(), order.end());
  Minutes best = -1;
  do {
    Minutes v = replay_with_precedence(inst, order);
    if (v >= 0 && (best < 0 || v < best)) best = v;
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

LineInstance tiny_instance(std::mt19937& rng, int variant) {
  LineInstance inst;
  int n = 3 + variant % 2;  // 3 or 4 stations
  std::vector<Station> stations;
  for (int i = 1; i <= n; ++i)
    stations.push_back(st(i, "S" + std::to_string(i), 2));
  std::vector<TrackSegment> tracks;
  for (int i = 1; i < n; ++i)
    tracks.push_back(tk(i, i, i + 1, 10 + (variant % 3) * 5));
  inst.net = build_network(stations, tracks);

  int m = 1 + variant % 3;
  std::vector<Train> trains;
  const TrainCategory cats[] = {TrainCategory::Premium, TrainCategory::Local,
                                TrainCategory::Passenger};
  for (int j = 1; j <= m; ++j) {
    trains.push_back({j, "T" + std::to_string(j), cats[(variant + j) % 3]});
    Minutes t = 400 + j * (8 + variant % 5);
    for (int i = 1; i <= n; ++i) {
      ScheduleEntry e = entry(j, i, t, t + 2);
      inst.tt.push_back(e);
      if (i < n) {
        Minutes journey = *inst.net.min_journey(i, i + 1);
        t = e.planned_departure + journey +
            static_cast<int>(rng() % 2) * 3 + 6;
      }
    }
  }
  inst.fleet = Fleet::of(trains);

  Minutes tau = 15 + (variant % 4) * 5;
  if (variant % 2 == 0) {
    inst.event = block_station(inst.net, 2, 430 + variant % 7, tau, tau);
  } else {
    inst.event.onset = 430 + variant % 7;
    inst.event.blocked_tracks.insert(1);
    inst.event.recovery = {tau, tau, RecoveryDensity::Uniform};
  }
  return inst;
}

}  // namespace

TEST_CASE("reschedule") {
  SUBCASE("buffer ahead of every arrival -> zero delay, no changes") {
    auto net = build_network({st(1, "A"), st(2, "B"), st(3, "C")},
                             {tk(1, 1, 2, 30), tk(2, 2, 3, 20)});
    Fleet fleet = fleet_of({{1, "12273", TrainCategory::Premium}});
    Timetable tt{entry(1, 1, 900, 910), entry(1, 2, 940, 945, 1),
                 entry(1, 3, 965, 970, 2)};
    DisasterEvent ev = block_station(net, 2, 780, 10, 30);  // 13:00
    auto r = reschedule(net, fleet, tt, ev, PriorityPolicy::defaults(), 1);
    CHECK(r.total_delay == 0);
    for (const auto& d : r.decisions) CHECK(d.kind == DecisionKind::NoChange);
    CHECK(validate_schedule(net, r.new_schedule).empty());
  }
  SUBCASE("matches the exhaustive optimum on a tiny blocked-track case") {
    std::mt19937 rng(2);
    LineInstance inst = tiny_instance(rng, 1);
    auto r = reschedule(inst.net, inst.fleet, inst.tt, inst.event,
                        PriorityPolicy::defaults(), 7, inst.config);
    Minutes opt = exhaustive_optimum(inst);
    REQUIRE(opt >= 0);
    CHECK(r.total_delay >= opt);
    CHECK(validate_schedule(inst.net, r.new_schedule).empty());
  }
  SUBCASE("priority train leaves first after recovery") {
    auto net = build_network({st(1, "A", 3), st(2, "B", 3)},
                             {tk(1, 1, 2, 15)});
    Fleet fleet = fleet_of({{1, "63525", TrainCategory::Local},
                            {2, "12313", TrainCategory::Premium}});
    // Local is scheduled out first; both buffered behind a blocked track.
    Timetable tt{entry(1, 1, 580, 600), entry(1, 2, 615, 620, 1),
                 entry(2, 1, 585, 603), entry(2, 2, 618, 623, 1)};
    tt[0].platform = 1;
    tt[2].platform = 2;
    DisasterEvent ev;
    ev.onset = 595;
    ev.blocked_tracks.insert(1);
    ev.recovery = {20, 20, RecoveryDensity::Uniform};
    auto r = reschedule(net, fleet, tt, ev, PriorityPolicy::defaults(), 3);
    // t_R = 615; the premium departs first
    auto prem = itinerary_of(r.new_schedule, 2);
    auto loc = itinerary_of(r.new_schedule, 1);
    CHECK(prem[0]->actual_departure < loc[0]->actual_departure);
    CHECK(validate_schedule(net, r.new_schedule).empty());
  }
  SUBCASE("deterministic for a fixed seed") {
    std::mt19937 rng(5);
    LineInstance inst = tiny_instance(rng, 2);
    auto a = reschedule(inst.net, inst.fleet, inst.tt, inst.event,
                        PriorityPolicy::defaults(), 11, inst.config);
    auto b = reschedule(inst.net, inst.fleet, inst.tt, inst.event,
                        PriorityPolicy::defaults(), 11, inst.config);
    REQUIRE(a.new_schedule.size() == b.new_schedule.size());
    for (size_t i = 0; i < a.new_schedule.size(); ++i) {
      CHECK(a.new_schedule[i].actual_arrival ==
            b.new_schedule[i].actual_arrival);
      CHECK(a.new_schedule[i].actual_departure ==
            b.new_schedule[i].actual_departure);
      CHECK(a.new_schedule[i].platform == b.new_schedule[i].platform);
    }
    CHECK(a.total_delay == b.total_delay);
  }
}

TEST_CASE("optimality gap and baseline dominance over the tiny corpus") {
  std::mt19937 rng(99);
  int optimal_hits = 0;
  int corpus = 0;
  for (int variant = 0; variant < 20; ++variant) {
    LineInstance inst = tiny_instance(rng, variant);
    auto r = reschedule(inst.net, inst.fleet, inst.tt, inst.event,
                        PriorityPolicy::defaults(), 1234 + variant,
                        inst.config);
    CHECK(validate_schedule(inst.net, r.new_schedule).empty());
    auto w = wait_in_place_baseline(inst.net, inst.fleet, inst.tt, inst.event,
                                    PriorityPolicy::defaults(), 1234 + variant,
                                    inst.config);
    CHECK(r.total_delay <= w.total_delay);
    Minutes opt = exhaustive_optimum(inst);
    REQUIRE(opt >= 0);
    CHECK(r.total_delay >= opt);
    if (r.total_delay == opt) ++optimal_hits;
    ++corpus;
  }
  CHECK(corpus == 20);
  CHECK(optimal_hits >= 15);
}

TEST_CASE("centralized baseline") {
  std::mt19937 rng(4);
  LineInstance inst = tiny_instance(rng, 3);
  auto dist = reschedule(inst.net, inst.fleet, inst.tt, inst.event,
                         PriorityPolicy::defaults(), 21, inst.config);
  SUBCASE("zero latency collapses to the distributed result") {
    auto base = centralized_baseline(inst.net, inst.fleet, inst.tt, inst.event,
                                     PriorityPolicy::defaults(), 21,
                                     inst.config, {0, 2});
    CHECK(base.total_delay == dist.total_delay);
  }
  SUBCASE("positive latency never beats the distributed result") {
    auto base = centralized_baseline(inst.net, inst.fleet, inst.tt, inst.event,
                                     PriorityPolicy::defaults(), 21,
                                     inst.config, {3, 2});
    CHECK(base.total_delay >= dist.total_delay);
    CHECK(validate_schedule(inst.net, base.new_schedule).empty());
  }
  SUBCASE("latency beyond the horizon starves the plan") {
    ProjectionConfig cfg = inst.config;
    cfg.horizon = 600;
    CHECK_THROWS_AS(
        centralized_baseline(inst.net, inst.fleet, inst.tt, inst.event,
                             PriorityPolicy::defaults(), 21, cfg,
                             {100000, 2}),
        Error);
  }
}

TEST_CASE("reschedule partitions affected trains into exactly one case") {
  std::mt19937 rng(31);
  for (int variant = 0; variant < 10; ++variant) {
    LineInstance inst = tiny_instance(rng, variant);
    auto r = reschedule(inst.net, inst.fleet, inst.tt, inst.event,
                        PriorityPolicy::defaults(), 5 + variant, inst.config);
    std::set<TrainId> seen;
    for (const auto& d : r.decisions) {
      CHECK(seen.insert(d.train).second);  // one decision per train
    }
    auto affected =
        affected_trains(inst.net, inst.tt, inst.event, r.buffer);
    CHECK(seen.size() == affected.size());
    // retiming never pulls a train ahead of its timetable
    for (const auto& e : r.new_schedule) {
      CHECK(e.actual_arrival >= e.planned_arrival);
      CHECK(e.actual_departure >= e.planned_departure);
    }
  }
}
