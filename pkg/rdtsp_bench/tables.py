"""
Tables de résultats : rapport de banc (CSV / JSON) et table de ratios.
"""

import csv
import io
import json

from .serializers import to_builtin


class Column:
    """Colonne d'une table : nom d'en-tête et accesseur sur la ligne."""

    def __init__(self, accessor, verbose_name=None, formatter=None):
        self.accessor = accessor
        self.verbose_name = verbose_name or accessor
        self.formatter = formatter or format_value

    def value(self, row):
        value = row[self.accessor] if isinstance(row, dict) else getattr(row, self.accessor)
        return self.formatter(value)


def format_value(value):
    """Représentation stable d'une cellule ; les flottants gardent tous leurs chiffres."""
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ''
    return str(value)


def format_list(values):
    return json.dumps([float(v) for v in values])


class BenchTable:
    """Table du rapport de banc, une ligne par (scénario, n, politique)."""

    scenario = Column('scenario')
    n = Column('n')
    policy = Column('policy')
    map_means = Column('map_means', formatter=format_list)
    mean = Column('mean')
    min = Column('min')
    stderr = Column('stderr')
    n_maps = Column('n_maps')
    n_alg = Column('n_alg')

    class Meta:
        fields = (
            'scenario',
            'n',
            'policy',
            'map_means',
            'mean',
            'min',
            'stderr',
            'n_maps',
            'n_alg',
            'master_seed',
        )
        header_fields = (
            'generator_version',
            'rng_algorithm',
            'master_seed',
            'n_maps',
            'n_alg',
        )

    def __init__(self, report):
        self.report = report

    def header_lines(self):
        return [f"# {field}={getattr(self.report, field)}" for field in self.Meta.header_fields]

    def cells(self, row):
        columns = [getattr(self, field) for field in self.Meta.fields[:-1]]
        return [column.value(row) for column in columns] + [str(self.report.master_seed)]

    def to_csv(self):
        """CSV déterministe : lignes '#' de provenance puis une ligne par cellule."""
        buffer = io.StringIO()
        for line in self.header_lines():
            buffer.write(line + '\n')
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(self.Meta.fields)
        for row in self.report.rows:
            writer.writerow(self.cells(row))
        return buffer.getvalue()

    def to_json(self):
        """Variante JSON du CSV, avec en plus les indices de cartes et écarts-types."""
        data = {field: getattr(self.report, field) for field in self.Meta.header_fields}
        data['rows'] = [
            {
                'scenario': row.scenario,
                'n': row.n,
                'policy': row.policy,
                'map_indices': list(row.map_indices),
                'map_means': list(row.map_means),
                'map_stds': list(row.map_stds),
                'mean': row.mean,
                'min': row.min,
                'stderr': row.stderr,
                'n_maps': row.n_maps,
                'n_alg': row.n_alg,
            }
            for row in self.report.rows
        ]
        return json.dumps(to_builtin(data), indent=2) + '\n'


def report_to_csv(report):
    return BenchTable(report).to_csv()


def report_to_json(report):
    return BenchTable(report).to_json()


class RatioTable:
    """Table de comparaison : valeur de chaque politique rapportée à la référence."""

    class Meta:
        fields = ('policy', 'value', 'reference', 'ratio', 'bound', 'relation', 'holds')

    def __init__(self, rows, family=None):
        """
        Args:
            rows: Liste de dicts aux champs de Meta.fields
            family: Famille d'instance (pour l'en-tête)
        """
        self.rows = list(rows)
        self.family = family

    def to_csv(self):
        buffer = io.StringIO()
        if self.family:
            buffer.write(f"# family={self.family}\n")
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(self.Meta.fields)
        for row in self.rows:
            writer.writerow([format_value(row[field]) for field in self.Meta.fields])
        return buffer.getvalue()

    def to_json(self):
        return json.dumps(to_builtin({'family': self.family, 'rows': self.rows}), indent=2) + '\n'

    def render(self):
        """Texte aligné pour la sortie standard."""
        header = list(self.Meta.fields)
        lines = [header]
        for row in self.rows:
            cells = []
            for field in header:
                value = row[field]
                if isinstance(value, float):
                    value = f"{value:.6g}"
                cells.append('' if value is None else str(value))
            lines.append(cells)
        widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
        rendered = ['  '.join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
                    for line in lines]
        if self.family:
            rendered.insert(0, f"famille : {self.family}")
        return '\n'.join(rendered) + '\n'
