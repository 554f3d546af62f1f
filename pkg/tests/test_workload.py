import pytest
from hypothesis import given, settings, strategies as st

from baas_sim.workload import (AllAtZero, Cloudlet, Constant, Prng, Uniform, UniformJitter,
                               WorkloadConfig, WorkloadError, generate, load_csv, write_csv)

# first outputs from seed 0, cross-checked against a numpy uint64 implementation
SEED0_GOLDEN = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_prng_golden_values():
    rng = Prng(0)
    assert [rng.next() for _ in range(3)] == SEED0_GOLDEN


def test_prng_wraps_64_bits():
    rng = Prng(2**64 - 1)
    for _ in range(100):
        assert 0 <= rng.next() < 2**64


def test_uniform_int_is_modulo_reduction():
    a, b = Prng(7), Prng(7)
    assert a.uniform_int(10, 20) == 10 + b.next() % 11


def test_generate_empty():
    assert generate(WorkloadConfig(num_cloudlets=0)) == []


def test_generate_defaults_mirror_cloudlet_parameters():
    cl = generate(WorkloadConfig(num_cloudlets=25))
    assert len(cl) == 25
    for i, c in enumerate(cl):
        assert (c.cloudlet_id, c.user_id) == (i, i)
        assert (c.length_mi, c.file_size, c.output_size, c.pes) == (40000, 300, 300, 1)
        assert c.arrival_ms == 0 and c.priority == 0


def test_generate_draw_order():
    cfg = WorkloadConfig(num_cloudlets=2, length_dist=Uniform(10, 20),
                         priority_dist=Uniform(0, 3), arrival=UniformJitter(100, 50), seed=9)
    rng = Prng(9)
    expected = []
    for i in range(2):
        length = 10 + rng.next() % 11
        prio = rng.next() % 4
        arr = i * 100 + rng.next() % 51
        expected.append((i, length, prio, arr))
    got = sorted((c.cloudlet_id, c.length_mi, c.priority, c.arrival_ms) for c in generate(cfg))
    assert got == expected


def test_constant_dists_consume_no_draws():
    cfg = WorkloadConfig(num_cloudlets=3, length_dist=Uniform(1, 1000), seed=5)
    rng = Prng(5)
    assert [c.length_mi for c in generate(cfg)] == [1 + rng.next() % 1000 for _ in range(3)]


def test_generate_sorted_by_arrival_then_id():
    cfg = WorkloadConfig(num_cloudlets=200, arrival=UniformJitter(10, 500), seed=3)
    cl = generate(cfg)
    keys = [(c.arrival_ms, c.cloudlet_id) for c in cl]
    assert keys == sorted(keys)
    assert sorted(c.cloudlet_id for c in cl) == list(range(200))


@pytest.mark.parametrize("cfg", [
    WorkloadConfig(num_cloudlets=1, length_dist=Uniform(5, 4)),
    WorkloadConfig(num_cloudlets=1, length_dist=Constant(0)),
    WorkloadConfig(num_cloudlets=1, priority_dist=Uniform(0, 8), priority_levels=8),
    WorkloadConfig(num_cloudlets=1, arrival=UniformJitter(-1, 0)),
    WorkloadConfig(num_cloudlets=-1),
])
def test_generate_rejects_invalid(cfg):
    with pytest.raises(WorkloadError):
        generate(cfg)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), n=st.integers(0, 40),
       lo=st.integers(1, 1000), span=st.integers(0, 1000), levels=st.integers(1, 10))
def test_generate_pure_and_in_bounds(seed, n, lo, span, levels):
    cfg = WorkloadConfig(num_cloudlets=n, length_dist=Uniform(lo, lo + span),
                         priority_dist=Uniform(0, levels - 1), priority_levels=levels,
                         arrival=UniformJitter(100, 30), seed=seed)
    a, b = generate(cfg), generate(cfg)
    assert a == b
    for c in a:
        assert lo <= c.length_mi <= lo + span
        assert 0 <= c.priority < levels


def test_csv_header_only(tmp_path):
    p = tmp_path / "w.csv"
    write_csv(p, [])
    assert load_csv(p) == []


def test_csv_roundtrip(tmp_path):
    cl = generate(WorkloadConfig(num_cloudlets=100, length_dist=Uniform(1, 90000),
                                 priority_dist=Uniform(0, 7),
                                 arrival=UniformJitter(1000, 5000), seed=11))
    p = tmp_path / "w.csv"
    write_csv(p, cl)
    assert load_csv(p) == cl


def _write(tmp_path, body):
    p = tmp_path / "w.csv"
    p.write_text("cloudlet_id,user_id,length_mi,file_size,output_size,pes,priority,arrival_ms\n"
                 + body)
    return p


def test_csv_zero_length_names_line(tmp_path):
    p = _write(tmp_path, "0,0,100,300,300,1,0,0\n1,1,0,300,300,1,0,0\n")
    with pytest.raises(WorkloadError, match="line 3: length_mi must be ≥ 1"):
        load_csv(p)


@pytest.mark.parametrize("body, msg", [
    ("0,0,100,300,300,1,0,0\n0,0,100,300,300,1,0,5\n", "line 3: duplicate"),
    ("0,0,100,300,300,1,-1,0\n", "line 2: priority"),
    ("0,0,100,300,300,1,0\n", "line 2: expected 8"),
    ("0,0,abc,300,300,1,0,0\n", "line 2: length_mi is not an integer"),
])
def test_csv_errors(tmp_path, body, msg):
    with pytest.raises(WorkloadError, match=msg):
        load_csv(_write(tmp_path, body))


def test_csv_missing_file(tmp_path):
    with pytest.raises(WorkloadError, match="cannot read"):
        load_csv(tmp_path / "nope.csv")


def test_csv_bad_header(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("id,length\n")
    with pytest.raises(WorkloadError, match="line 1"):
        load_csv(p)


def test_csv_resorts_rows(tmp_path):
    p = _write(tmp_path, "1,1,100,300,300,1,0,10\n0,0,100,300,300,1,0,20\n2,2,100,300,300,1,0,10\n")
    assert [c.cloudlet_id for c in load_csv(p)] == [1, 2, 0]
