from setuptools import setup

from oppsim import version

setup(name='oppsim',
      version=version,
      description="Data dissemination simulator for opportunistic networks",
      long_description="""Discrete-time simulation of cooperative caching in
opportunistic networks: social-aware (SCH) and recognition-based (RH) cache
heuristics over community-based mobility, with dynamic channels, item TTLs
and selfish nodes.""",
      classifiers=['Development Status :: 3 - Alpha',
                   'Intended Audience :: Science/Research',
                   'License :: OSI Approved :: BSD License',
                   'Programming Language :: Python :: 3',
                   'Topic :: System :: Networking',
                   'Topic :: Scientific/Engineering',
                   ], # Get strings from http://pypi.python.org/pypi?%3Aaction=list_classifiers
      keywords='opportunistic networks DTN caching simulation',
      license='BSD',
      packages=['oppsim', 'oppsim.scripts'],
      include_package_data=True,
      zip_safe=False,
      test_suite='nose.collector',
      tests_require=['pynose'],
      install_requires=[
          'numpy',
          'scipy',
          'pytz',
          'simplejson',
          ],
      entry_points="""
      # -*- Entry points: -*-
      [console_scripts]
      oppsim = oppsim.cli:main
      """,
      scripts = [
          'oppsim/scripts/oppsim',
      ],
)
