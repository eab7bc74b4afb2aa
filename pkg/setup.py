"""The setup script."""
from setuptools import setup, find_packages


setup(
	name = "quarterwave",
	version= "0.1.0",
	packages=find_packages('.', exclude=["tests", "tests.*", "examples", "examples.*"]),
    description=("Boundary-integral solver for two-body Schroedinger operators on the quarter plane with a Robin "
		"boundary interaction: bound states, resolvent, scattering amplitudes and a finite-difference oracle."),
    license="LGPLv2",
    include_package_data=True,
    package_data={"quarterwave.examples": ["potentials/*.json"]},
    python_requires=">=3.10",
    install_requires=[
		'numpy>=1.24.0', #Works for 1.26.4
		'scipy>=1.10.0', #Works for 1.11.4
        'pathos>=0.3.0', #Works for 0.3.0
        'setuptools>=65.0.0', #Works for 65.5.0
		'dill>=0.3.0', #Works for 0.3.6
		'multiprocess>=0.70.00', #Works for 0.70.14
        'pyside6-utils>=1.2.1, <1.3.0', #Works for 1.2.1
        'PySignal>=1.1.1' #Works for 1.1.1,
	],
	extras_require={
		"test": ['pytest>=7.0.0']
	},
	entry_points={
		"console_scripts": ["quarterwave=quarterwave.app.cli:main"]
	}
)
