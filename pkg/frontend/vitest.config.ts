// Plain object on purpose: the runner is a global install, so `vitest/config`
// is not resolvable from this directory.
export default {
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
  },
};
