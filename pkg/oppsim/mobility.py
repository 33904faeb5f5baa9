"""Community-based mobility and contact detection.

The area is split into a grid of cells. Each community lives in its own home
cell, where its members move between uniformly drawn waypoints at uniformly
drawn speeds. Travellers leave their home cell now and then to visit other
communities, following the wiring of the scenario:

* ``OT``: one traveller per community, always visiting the next community in
  the ring;
* ``ZT``: one traveller per community, choosing its destination with Zipf
  preferences over the other communities (rotated per community);
* ``TT``: one traveller per other community, each with a fixed destination.

Two nodes are in contact while they are at most the radio range apart;
contacts are reported when they start and when they end."""

__all__ = ['SCENARIOS', 'Cell', 'Topology', 'TravellerState', 'TravellerMove',
           'MobilityWorld', 'ContactEvent', 'ContactDetector', 'TraceWriter',
           'home_cells', 'cell_rect', 'next_waypoint', 'traveller_decision',
           'step_positions', 'detect_contacts']

import csv
import logging
from collections import Counter, namedtuple

import numpy as np
from scipy.spatial import cKDTree

from oppsim.util import rotate, zipf_weights

log = logging.getLogger(__name__)

SCENARIOS = ('OT', 'ZT', 'TT')


class Cell(namedtuple('Cell', 'x0 y0 x1 y1')):
    """Cell(x0, y0, x1, y1)

    An axis aligned rectangle of the area."""

    __slots__ = ()

    def __contains__(self, point):
        x, y = point
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    @property
    def center(self):
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)


def home_cells(rows, cols, count):
    """Grid positions (row, col) of the home cells of `count` communities.

    Cells on even rows and even columns are taken in row-major order, so no
    two of them share an edge. Raises ValueError when the grid is too small."""
    candidates = [(r, c) for r in range(0, rows, 2) for c in range(0, cols, 2)]
    if count > len(candidates):
        raise ValueError('A %dx%d grid has room for %d separate home cells, '
                         '%d needed' % (rows, cols, len(candidates), count))
    return candidates[:count]


def cell_rect(row, col, width, height, rows, cols):
    cell_w = float(width) / cols
    cell_h = float(height) / rows
    return Cell(col * cell_w, row * cell_h, (col + 1) * cell_w,
                (row + 1) * cell_h)


class Topology(object):
    """Which node belongs to which community, who travels and where to.

    Nodes are numbered community by community; the travellers of a community
    are its highest numbered members."""

    def __init__(self, scenario, communities, nodes_per_community,
                 zipf_exp=1.0):
        if scenario not in SCENARIOS:
            raise ValueError('Unknown scenario %r' % (scenario,))
        self.scenario = scenario
        self.community_count = communities
        self.nodes_per_community = nodes_per_community
        self.zipf_exp = zipf_exp
        self.travellers = {}
        for k in range(communities):
            for node_id, destinations, weights in self._wiring(k):
                self.travellers[node_id] = (destinations, weights)

    def _wiring(self, k):
        others = self.visit_order(k)
        if not others:
            return []
        last = (k + 1) * self.nodes_per_community - 1
        if self.scenario == 'OT':
            return [(last, others[:1], np.ones(1))]
        if self.scenario == 'ZT':
            return [(last, others, zipf_weights(len(others), self.zipf_exp))]
        if len(others) > self.nodes_per_community:
            raise ValueError('%d travellers do not fit in a community of %d' %
                             (len(others), self.nodes_per_community))
        return [(last - m, [dest], np.ones(1))
                for m, dest in enumerate(others)]

    @property
    def node_count(self):
        return self.community_count * self.nodes_per_community

    def members(self, community):
        start = community * self.nodes_per_community
        return list(range(start, start + self.nodes_per_community))

    def community_of(self, node_id):
        return node_id // self.nodes_per_community

    def visit_order(self, community):
        """The other communities, most connected first: the ring successor in
        OT, the most preferred destination in ZT, a fixed order in TT."""
        return rotate(range(self.community_count), community)[1:]

    def is_traveller(self, node_id):
        return node_id in self.travellers

    def traveller(self, node_id, stay_prob, home_stay_prob=0.0):
        destinations, weights = self.travellers[node_id]
        return TravellerState(self.community_of(node_id), destinations,
                              weights, stay_prob,
                              home_stay_prob=home_stay_prob)


class TravellerState(object):
    """Where a traveller lives, where it may go and where it currently is."""

    def __init__(self, home, destinations, weights, stay_prob, visiting=None,
                 home_stay_prob=0.0):
        self.home = home
        self.destinations = list(destinations)
        self.weights = np.asarray(weights, dtype=float)
        self.stay_prob = stay_prob
        self.home_stay_prob = home_stay_prob
        self.visiting = visiting

    def __repr__(self):
        return 'TravellerState(home=%r, destinations=%r, visiting=%r)' % (
            self.home, self.destinations, self.visiting)


TravellerMove = namedtuple('TravellerMove', 'kind community')


def next_waypoint(cell, rng, speed_range=(1.0, 1.86)):
    """A destination uniform over `cell` and a speed uniform over
    `speed_range`."""
    x = rng.uniform(cell.x0, cell.x1)
    y = rng.uniform(cell.y0, cell.y1)
    speed = rng.uniform(speed_range[0], speed_range[1])
    return (x, y), speed


def traveller_decision(traveller, rng):
    """Decide what a traveller does after completing a movement and update
    where it is. Returns a :py:class:`TravellerMove` whose kind is 'stay',
    'home' or 'visit'.

    A visiting traveller stays with probability `stay_prob`. At home it
    leaves right away unless `home_stay_prob` is set, in which case it moves
    inside its home cell once more with that probability."""
    if traveller.visiting is not None:
        if rng.random() < traveller.stay_prob:
            return TravellerMove('stay', traveller.visiting)
        traveller.visiting = None
        return TravellerMove('home', traveller.home)
    if traveller.home_stay_prob > 0 and \
            rng.random() < traveller.home_stay_prob:
        return TravellerMove('stay', traveller.home)
    if len(traveller.destinations) == 1:
        destination = traveller.destinations[0]
    else:
        index = rng.choice(len(traveller.destinations), p=traveller.weights)
        destination = traveller.destinations[int(index)]
    traveller.visiting = destination
    return TravellerMove('visit', destination)


class MobilityWorld(object):
    """Positions, waypoints and speeds of every node, as numpy arrays
    indexed by node id."""

    def __init__(self, topology, cells, rng, speed_range=(1.0, 1.86),
                 stay_prob=0.5, home_stay_prob=0.0):
        self.topology = topology
        self.cells = list(cells)
        self.rng = rng
        self.speed_range = speed_range
        n = topology.node_count
        self.positions = np.zeros((n, 2))
        self.targets = np.zeros((n, 2))
        self.speeds = np.zeros(n)
        self.location = np.array([topology.community_of(i) for i in range(n)],
                                 dtype=np.int64)
        self.travellers = dict(
            (node_id, topology.traveller(node_id, stay_prob, home_stay_prob))
            for node_id in sorted(topology.travellers))
        self.visits = Counter()
        for node_id in range(n):
            cell = self.cells[self.location[node_id]]
            self.positions[node_id] = (rng.uniform(cell.x0, cell.x1),
                                       rng.uniform(cell.y0, cell.y1))
            self.next_waypoint(node_id)

    @classmethod
    def from_config(cls, config, topology, rng):
        homes = home_cells(config['grid.rows'], config['grid.cols'],
                           topology.community_count)
        cells = [cell_rect(r, c, config['area.width'], config['area.height'],
                           config['grid.rows'], config['grid.cols'])
                 for r, c in homes]
        return cls(topology, cells, rng,
                   speed_range=(config['mobility.speed_min'],
                                config['mobility.speed_max']),
                   stay_prob=config['mobility.stay_prob'],
                   home_stay_prob=config['mobility.home_stay_prob'])

    def cell_of(self, node_id):
        """The cell `node_id` is currently moving in."""
        return self.cells[self.location[node_id]]

    def next_waypoint(self, node_id):
        target, speed = next_waypoint(self.cell_of(node_id), self.rng,
                                      self.speed_range)
        self.targets[node_id] = target
        self.speeds[node_id] = speed

    def arrive(self, node_id):
        """Called when `node_id` reaches its waypoint."""
        traveller = self.travellers.get(node_id)
        if traveller is not None:
            move = traveller_decision(traveller, self.rng)
            self.location[node_id] = move.community
            if move.kind == 'visit':
                self.visits[(node_id, move.community)] += 1
                log.debug('Traveller %d heads to community %d', node_id,
                          move.community)
        self.next_waypoint(node_id)


def step_positions(world, dt=1.0):
    """Advance every node along its segment by speed * dt. Nodes that reach
    their waypoint stop on it and pick the next one."""
    if dt <= 0:
        raise ValueError('Time step must be positive, got %r' % dt)
    delta = world.targets - world.positions
    distance = np.hypot(delta[:, 0], delta[:, 1])
    travel = world.speeds * dt
    arrived = travel >= distance
    moving = ~arrived
    world.positions[arrived] = world.targets[arrived]
    world.positions[moving] += (delta[moving] *
                                (travel[moving] / distance[moving])[:, None])
    for node_id in np.flatnonzero(arrived):
        world.arrive(int(node_id))
    return world.positions


ContactEvent = namedtuple('ContactEvent', 'a b start end')


def detect_contacts(positions, radio_range, previous=frozenset()):
    """Pairs (a, b), a < b, at most `radio_range` apart, together with the
    pairs that came into range and went out of range since `previous`.

    Returns (current, starts, ends); starts and ends are sorted."""
    if len(positions) < 2:
        current = frozenset()
    else:
        current = frozenset(cKDTree(positions).query_pairs(radio_range))
    return current, sorted(current - previous), sorted(previous - current)


class ContactDetector(object):
    """Edge-triggered contact tracking across ticks."""

    def __init__(self, radio_range):
        self.radio_range = radio_range
        self.in_range = frozenset()
        self.opened = {}

    def update(self, positions, t):
        """Return the contact events that started at `t`; the events that
        ended are returned as closed :py:class:`ContactEvent` values in the
        second slot."""
        self.in_range, starts, ends = detect_contacts(
            positions, self.radio_range, self.in_range)
        closed = []
        for a, b in ends:
            closed.append(ContactEvent(a, b, self.opened.pop((a, b)), t))
        started = []
        for a, b in starts:
            self.opened[(a, b)] = t
            started.append(ContactEvent(a, b, t, None))
        return started, closed


class TraceWriter(object):
    """Write node positions as CSV rows (t, node, x, y)."""

    def __init__(self, f):
        self.writer = csv.writer(f, lineterminator='\n')
        self.writer.writerow(['t', 'node', 'x', 'y'])

    def write(self, t, positions):
        for node_id, (x, y) in enumerate(positions):
            self.writer.writerow([t, node_id, '%.3f' % x, '%.3f' % y])
