from setuptools import setup
# To use a consistent encoding
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))


# Get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

dev_requires = [
    'flake8',
    'coverage',
    'sphinx',
    'sphinx_rtd_theme',
    'sphinx-autobuild',
    'pytest',
    'pytest-cov',
    'hypothesis'
]

setup(
    name='virtual-mirror-sna',
    version='2026.10.0',
    description='Social network analysis of team communication archives and surveys',
    long_description=long_description,
    long_description_content_type='text/markdown',
    license='BSD-2',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Natural Language :: English',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Topic :: Scientific/Engineering :: Information Analysis',
        'Topic :: Sociology',
    ],
    keywords='social network analysis betweenness contribution index email survey',
    packages=['virtualmirror'],
    python_requires='>=3.8',
    install_requires=[
        'lxml',
        'jsonschema',
        'networkx',
        'numpy',
        'scipy',
        'pydot'
    ],
    extras_require={
        'dev': dev_requires,
        'test': dev_requires
    },
    include_package_data=True,
    package_data={
        'virtualmirror': ['schemas/*.json', 'lookups/*.csv']
    },
    entry_points={
        'console_scripts': [
            'virtualmirror=virtualmirror:main'
        ]
    }
)
