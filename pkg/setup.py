from setuptools import find_packages, setup

setup(
    name='rdtsp-bench',
    version='0.3',
    description='Politiques locales, solveurs exacts et banc de mesure pour le RD-TSP',
    install_requires=['numpy', 'networkx', 'drawsvg>=2.0'],
    extras_require={
        'test': ['pytest', 'hypothesis'],
    },
    packages=find_packages(exclude=['tests']),
    entry_points={
        'console_scripts': ['rdtsp=rdtsp_bench.cli:main'],
    },
    include_package_data=True,
    zip_safe=False,
)
