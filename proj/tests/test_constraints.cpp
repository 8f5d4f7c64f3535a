#include "rail/constraints.hpp"

#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace rail;

namespace {

Train train_of(TrainId id, TrainCategory c) { return {id, std::to_string(id), c}; }

ScheduleEntry entry(TrainId train, StationId station, Minutes oa, Minutes od,
                    Minutes xa, Minutes xd, PlatformIndex k = 1) {
  ScheduleEntry e;
  e.train = train;
  e.station = station;
  e.planned_arrival = oa;
  e.planned_departure = od;
  e.actual_arrival = xa;
  e.actual_departure = xd;
  e.platform = k;
  return e;
}

RailwayNetwork line3() {
  return build_network(
      {{1, "A", 2, false}, {2, "B", 2, true}, {3, "C", 2, false}},
      {{1, 1, 2, TrackRole::General, 30}, {2, 2, 3, TrackRole::General, 20}});
}

}  // namespace

TEST_CASE("check_continuity boundary cases") {
  ScheduleEntry a = entry(1, 1, 590, 600, 590, 600);
  SUBCASE("equality passes") {
    ScheduleEntry b = entry(1, 2, 630, 640, 630, 640);
    CHECK(check_continuity(a, b, 30));
  }
  SUBCASE("five minutes short fails") {
    ScheduleEntry b = entry(1, 2, 625, 640, 625, 640);
    CHECK_FALSE(check_continuity(a, b, 30));
  }
  SUBCASE("slack allowed") {
    ScheduleEntry b = entry(1, 2, 700, 710, 700, 710);
    CHECK(check_continuity(a, b, 30));
  }
}

TEST_CASE("compute_delay") {
  CHECK(compute_delay(entry(1, 1, 630, 640, 630, 640)) == 0);
  CHECK(compute_delay(entry(1, 1, 630, 640, 645, 650)) == 15);
  CHECK_THROWS_AS(compute_delay(entry(1, 1, 630, 640, 620, 640)), Error);
}

TEST_CASE("platform capacity") {
  OccupancyState occ;
  SUBCASE("six trains on six distinct platforms") {
    for (int j = 1; j <= 6; ++j) occ.occupy_platform(j, 1, j);
    CHECK(check_platform_capacity(occ, 1, 6));
  }
  SUBCASE("platform index out of range") {
    occ.occupy_platform(1, 1, 7);
    CHECK_FALSE(check_platform_capacity(occ, 1, 6));
  }
  SUBCASE("empty station is fine") { CHECK(check_platform_capacity(occ, 1, 6)); }
  SUBCASE("double-booked platform is rejected") {
    occ.occupy_platform(1, 1, 2);
    occ.occupy_platform(2, 1, 2);
    CHECK_FALSE(check_platform_capacity(occ, 1, 6));
  }
}

TEST_CASE("track exclusivity") {
  OccupancyState occ;
  SUBCASE("two holders violate") {
    occ.occupy_track(1, 3, 5);
    occ.occupy_track(2, 3, 5);
    CHECK_FALSE(check_track_exclusivity(occ, 3, 5));
  }
  SUBCASE("one holder passes") {
    occ.occupy_track(1, 3, 5);
    CHECK(check_track_exclusivity(occ, 3, 5));
  }
  SUBCASE("vacuous") { CHECK(check_track_exclusivity(occ, 3, 5)); }
}

TEST_CASE("resource_of") {
  OccupancyState occ;
  SUBCASE("platform holder") {
    occ.occupy_platform(1, 3, 2);
    Resource r = resource_of(occ, 1, 0);
    CHECK(r.kind == ResourceKind::Platform);
    CHECK(r.station == 3);
    CHECK(r.index == 2);
  }
  SUBCASE("track holder") {
    occ.occupy_track(1, 3, 1);
    Resource r = resource_of(occ, 1, 0);
    CHECK(r.kind == ResourceKind::Track);
    CHECK(r.index == 1);
  }
  SUBCASE("holding both throws") {
    occ.occupy_platform(1, 3, 2);
    occ.occupy_track(1, 3, 1);
    CHECK_THROWS_AS(resource_of(occ, 1, 0), Error);
  }
  SUBCASE("no resource yet") {
    CHECK(resource_of(occ, 9, 0).kind == ResourceKind::None);
  }
}

TEST_CASE("priority policy ranks") {
  PriorityPolicy policy;
  SUBCASE("mail at noon is second in the normal order") {
    CHECK(priority_rank(policy, train_of(1, TrainCategory::Mail), 720, 0) == 1);
  }
  SUBCASE("passenger at 10:00 is second in the busy order") {
    CHECK(priority_rank(policy, train_of(1, TrainCategory::Passenger), 600, 0) ==
          1);
  }
  SUBCASE("freight is last in every order") {
    Train freight = train_of(1, TrainCategory::Freight);
    for (OrderKind o : {OrderKind::Normal, OrderKind::Busy, OrderKind::Delayed}) {
      int fr = rank_in_order(o, PriorityLevel::Y3);
      for (PriorityLevel l : {PriorityLevel::Y1, PriorityLevel::Y2,
                              PriorityLevel::Y4, PriorityLevel::Y5}) {
        CHECK(rank_in_order(o, l) < fr);
      }
    }
    CHECK(priority_rank(policy, freight, 600, 0) == 4);
    CHECK(priority_rank(policy, freight, 720, 500) == 4);
  }
  SUBCASE("cited orderings hold pairwise") {
    using PL = PriorityLevel;
    auto leq = [](OrderKind o, PL a, PL b) {
      return rank_in_order(o, a) <= rank_in_order(o, b);
    };
    auto lt = [](OrderKind o, PL a, PL b) {
      return rank_in_order(o, a) < rank_in_order(o, b);
    };
    // normal: y1 > y2 > y4 > y5 > y3
    CHECK(lt(OrderKind::Normal, PL::Y1, PL::Y2));
    CHECK(lt(OrderKind::Normal, PL::Y2, PL::Y4));
    CHECK(lt(OrderKind::Normal, PL::Y4, PL::Y5));
    CHECK(lt(OrderKind::Normal, PL::Y5, PL::Y3));
    // busy: y1 > y4 > y5 > y2 > y3
    CHECK(lt(OrderKind::Busy, PL::Y1, PL::Y4));
    CHECK(lt(OrderKind::Busy, PL::Y4, PL::Y5));
    CHECK(lt(OrderKind::Busy, PL::Y5, PL::Y2));
    CHECK(lt(OrderKind::Busy, PL::Y2, PL::Y3));
    // delayed: y4 >= y1 >= y5 >= y2 > y3
    CHECK(leq(OrderKind::Delayed, PL::Y4, PL::Y1));
    CHECK(leq(OrderKind::Delayed, PL::Y1, PL::Y5));
    CHECK(leq(OrderKind::Delayed, PL::Y5, PL::Y2));
    CHECK(lt(OrderKind::Delayed, PL::Y2, PL::Y3));
  }
  SUBCASE("busy-window boundaries are half-open") {
    CHECK(active_order(policy, 539, false) == OrderKind::Normal);
    CHECK(active_order(policy, 540, false) == OrderKind::Busy);
    CHECK(active_order(policy, 1139, false) == OrderKind::Busy);
    CHECK(active_order(policy, 1140, false) == OrderKind::Normal);
  }
  SUBCASE("delayed context favours the on-time train") {
    Train late_premium = train_of(1, TrainCategory::Premium);
    Train ontime_passenger = train_of(2, TrainCategory::Passenger);
    CHECK(delayed_context_active(policy, {{late_premium, 45},
                                          {ontime_passenger, 0}}));
    CHECK(higher_priority(policy, ontime_passenger, 0, late_premium, 45, 720,
                          true));
    CHECK_FALSE(delayed_context_active(policy, {{late_premium, 30},
                                                {ontime_passenger, 0}}));
  }
}

TEST_CASE("mdp transitions are constraint-guarded") {
  auto net = line3();
  std::map<StationId, int> usable{{2, 1}};  // disaster at B: one platform left
  MdpModel model = MdpModel::build(net, 2, 1, usable);
  model.train_states[7] = MdpState::OnTrackToDisasterStation;
  model.train_states[8] = MdpState::AtNeighborPlatform;

  SUBCASE("train on track, all usable platforms taken -> no move") {
    OccupancyState occ;
    occ.occupy_platform(9, 2, 1);
    CHECK(mdp_enabled_transitions(model, net, occ, 7).empty());
  }
  SUBCASE("train on track, one platform free -> station reachable") {
    OccupancyState occ;
    auto trs = mdp_enabled_transitions(model, net, occ, 7);
    REQUIRE(trs.size() == 1);
    CHECK(trs[0].to == MdpState::AtDisasterStationPlatform);
  }
  SUBCASE("train at neighbor, track and platforms busy -> no move") {
    OccupancyState occ;
    occ.occupy_platform(9, 2, 1);
    occ.occupy_track(10, 2, 1);
    CHECK(mdp_enabled_transitions(model, net, occ, 8).empty());
  }
  SUBCASE("guards returned are sound") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      OccupancyState occ;
      if (rng() % 2) occ.occupy_platform(9, 2, 1);
      if (rng() % 2) occ.occupy_track(10, 2, 1);
      if (rng() % 2) occ.occupy_platform(11, 1, 1 + rng() % 2);
      for (TrainId t : {7, 8}) {
        for (const auto& tr : mdp_enabled_transitions(model, net, occ, t)) {
          for (const auto& g : tr.guards)
            CHECK(mdp_guard_holds(model, net, occ, g));
        }
      }
    }
  }
  SUBCASE("unknown train state") {
    OccupancyState occ;
    CHECK_THROWS_AS(mdp_enabled_transitions(model, net, occ, 99), Error);
  }
}

TEST_CASE("dcop instance counts") {
  auto net = line3();
  Timetable tt{entry(1, 1, 600, 605, 600, 605), entry(1, 2, 635, 640, 635, 640),
               entry(2, 1, 610, 615, 610, 615)};
  auto d = DcopInstance::build(net, tt, 360, 40);
  CHECK(d.agent_count == 2 + 3);  // q = m + n
  CHECK(d.domain_lo == 360);
  CHECK(d.domain_hi == 400);
  CHECK(d.time_variable_count == 6);
  CHECK(d.indicator_variable_count > 0);
}

TEST_CASE("validate_schedule on planted faults") {
  auto net = line3();
  Timetable good{entry(1, 1, 590, 600, 590, 600, 1),
                 entry(1, 2, 630, 640, 630, 640, 1),
                 entry(1, 3, 660, 665, 660, 665, 1),
                 entry(2, 1, 630, 640, 630, 640, 2),
                 entry(2, 2, 670, 675, 670, 675, 2)};
  SUBCASE("feasible schedule has no violations") {
    CHECK(validate_schedule(net, good).empty());
  }
  SUBCASE("double-booked track -> exactly one exclusivity violation") {
    Timetable tt = good;
    // Make train 2 ride the single connecting track in train 1's window.
    tt[3] = entry(2, 1, 595, 600, 595, 600, 2);
    tt[4] = entry(2, 2, 630, 655, 630, 655, 2);
    tt[1].track_from_prev = 1;
    tt[4].track_from_prev = 1;
    auto v = validate_schedule(net, tt);
    int track_violations = 0;
    for (const auto& x : v)
      if (x.rule == RuleId::TrackExclusive) ++track_violations;
    CHECK(track_violations == 1);
  }
  SUBCASE("early arrival -> one violation") {
    Timetable tt = good;
    tt[0].actual_arrival = 585;  // planned 590
    auto v = validate_schedule(net, tt);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == RuleId::ArrivalNotEarly);
  }
}

TEST_CASE("validate_schedule agrees with the brute-force oracle") {
  std::mt19937 rng(20250810);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = testutil::random_instance(rng);
    auto got = validate_schedule(inst.net, inst.schedule);
    auto want = testutil::brute_force_violations(inst.net, inst.schedule);
    CHECK(testutil::same_violation_set(got, want));
    ++checked;
  }
  CHECK(checked == 300);
}
