#!/usr/bin/env python
#
# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
from setuptools import setup

with open('README.rst', encoding='utf-8') as f:
    readme = f.read()


setup(
    name="spanbreaker",
    version='0.1.0',
    description='variance reduced finite-sum solvers and their worst case '
                'instances',
    long_description=readme,
    license='Mozilla',
    platforms=['linux'],
    packages=[
        'spanbreaker',
        'spanbreaker.solvers',
        'spanbreaker.measure',
    ],
    entry_points={
        'console_scripts': [
            'spanbreaker = spanbreaker.cli:cli',
        ]
    },
    install_requires=[
        'click',
        'colorlog',
        'numpy>=1.17',
        'scipy',
        'pandas>=1.5',
    ],
    python_requires='>=3.7',
    tests_require=['pytest'],
    classifiers=[
        'Development Status :: 3 - Alpha',
        'License :: OSI Approved :: Mozilla Public License 2.0 (MPL 2.0)',
        'Operating System :: POSIX :: Linux',
        'Programming Language :: Python :: 3',
        'Intended Audience :: Science/Research',
        'Intended Audience :: Developers',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Environment :: Console',
    ],
)
