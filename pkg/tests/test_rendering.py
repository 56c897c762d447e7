import xml.etree.ElementTree as ET
from unittest import mock

import pytest

from conftest import random_instance
from rdtsp_bench.exceptions import NoCoordinates
from rdtsp_bench.models import Tour
from rdtsp_bench.services.adversarial import adversarial_star_deterministic
from rdtsp_bench.services.evaluation import instance_from_points
from rdtsp_bench.services.rendering import MARGIN, RenderService


def parse(svg):
    return ET.fromstring(svg.encode('utf-8'))


def elements(root, tag):
    return [element for element in root.iter() if element.tag.endswith(tag)]


def polyline_points(root):
    (polyline,) = elements(root, 'polyline')
    return [tuple(float(v) for v in pair.split(',')) for pair in polyline.get('points').split()]


def identity_tour(n):
    return Tour(range(1, n + 1))


def test_default_prefix_draws_first_eighth():
    inst = random_instance(800, 0.99, seed=1)
    root = parse(RenderService().render(inst, identity_tour(800)))
    assert len(polyline_points(root)) == 101
    assert len(elements(root, 'circle')) == 800


def test_zero_prefix_draws_no_line():
    inst = random_instance(20, 0.9, seed=1)
    root = parse(RenderService().render(inst, identity_tour(20), prefix=0))
    assert elements(root, 'polyline') == []
    assert len(elements(root, 'circle')) == 20


def test_k_sets_the_default_prefix():
    inst = random_instance(20, 0.9, seed=1)
    root = parse(RenderService().render(inst, identity_tour(20), k=3))
    # ceil(20 / 3) = 7 récompenses, plus le départ
    assert len(polyline_points(root)) == 8


def test_drawing_stays_inside_margins():
    size = 500
    inst = random_instance(50, 0.9, seed=4, scale=123.0)
    root = parse(RenderService().render(inst, identity_tour(50), prefix=50, canvas_size=size))
    low, high = size * MARGIN - 1e-3, size * (1 - MARGIN) + 1e-3
    for x, y in polyline_points(root):
        assert low <= x <= high
        assert low <= y <= high
    for circle in elements(root, 'circle'):
        assert low <= float(circle.get('cx')) <= high
        assert low <= float(circle.get('cy')) <= high


def test_north_is_up():
    inst = instance_from_points([(0, 0), (0, 10), (10, 0)], 0.5)
    root = parse(RenderService().render(inst, Tour((1, 2)), prefix=2))
    start, north, east = polyline_points(root)
    assert north[1] < start[1]
    assert east[0] > start[0]


def test_instances_without_coordinates_need_a_layout():
    star = adversarial_star_deterministic('nn', 16)
    tour = star.reference_tour()
    with pytest.raises(NoCoordinates):
        RenderService().render(star.instance, tour)
    svg = RenderService().render(star.instance, tour, layout='star', title='Étoile')
    (title,) = elements(parse(svg), 'title')
    assert 'Étoile' in title.text
    assert 'schématique' in title.text


def test_title_is_escaped():
    inst = random_instance(5, 0.9, seed=0)
    svg = RenderService().render(inst, identity_tour(5), title='a < b & c')
    (title,) = elements(parse(svg), 'title')
    assert title.text == 'a < b & c'


@pytest.mark.parametrize('options', [{'prefix': 6}, {'prefix': -1}, {'k': 0}])
def test_invalid_render_options(options):
    inst = random_instance(5, 0.9, seed=0)
    with pytest.raises(ValueError):
        RenderService().render(inst, identity_tour(5), **options)


def test_save_writes_the_document(tmp_path):
    logger = mock.Mock()
    inst = random_instance(5, 0.9, seed=0)
    path = tmp_path / 'tour.svg'
    RenderService(logger=logger).save(str(path), inst, identity_tour(5))
    assert '<svg' in path.read_text(encoding='utf-8')
    logger.info.assert_called_once()
